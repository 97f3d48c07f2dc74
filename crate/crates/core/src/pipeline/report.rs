//! Report files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::RunReport;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    Json,
    Csv,
    #[default]
    All,
}

pub const REPORT_JSON: &str = "report.json";
pub const SOLUTION_CSV: &str = "solution.csv";
pub const STATEPREP_CSV: &str = "fig4_stateprep.csv";
pub const NORMS_CSV: &str = "fig5_norms.csv";
pub const OBSERVABLES_CSV: &str = "observables.csv";

/// Header and rows of one CSV file.
type Table = (Vec<String>, Vec<Vec<String>>);

/// Writes `value` as pretty JSON with a trailing newline.
pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn solution_rows(r: &RunReport) -> Table {
    let mut header: Vec<String> = [
        "basis_state",
        "classical",
        "combined_re",
        "combined_im",
        "combined_rescaled",
    ]
    .map(String::from)
    .to_vec();
    for run in &r.runs {
        header.push(format!("run{}_re", run.index + 1));
    }
    let rows = (0..r.classical.x_raw.len())
        .map(|i| {
            let mut row = vec![
                i.to_string(),
                r.classical.x_normalized[i].to_string(),
                r.combined.normalized.re[i].to_string(),
                r.combined.normalized.im[i].to_string(),
                r.combined.rescaled[i].to_string(),
            ];
            row.extend(r.runs.iter().map(|run| run.normalized.re[i].to_string()));
            row
        })
        .collect();
    (header, rows)
}

fn stateprep_rows(r: &RunReport) -> Table {
    let s = &r.stateprep;
    let b = r.plan.problem.rhs.values::<f64>(s.raw.len());
    let header = ["basis_state", "target", "loaded", "raw", "recovered", "rhs"]
        .map(String::from)
        .to_vec();
    let rows = (0..s.raw.len())
        .map(|i| {
            vec![
                i.to_string(),
                s.target[i].to_string(),
                s.normalized[i].to_string(),
                s.raw[i].to_string(),
                s.recovered[i].to_string(),
                b[i].to_string(),
            ]
        })
        .collect();
    (header, rows)
}

/// Row 0 is the extrapolated estimate, row `j` the `j`-th run.
fn norm_rows(r: &RunReport) -> Table {
    let header = vec!["run_index".to_string(), "norm".to_string()];
    let mut rows = vec![vec!["0".to_string(), r.combined.norm_estimate.to_string()]];
    rows.extend(
        r.runs
            .iter()
            .map(|run| vec![(run.index + 1).to_string(), run.norm_estimate.to_string()]),
    );
    (header, rows)
}

fn observable_rows(r: &RunReport) -> Table {
    let header = ["run_index", "kind", "mode", "scaled", "classical"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for (k, c) in r.observables.iter().enumerate() {
        let mode = serde_json::to_value(c.mode)
            .map(|v| v.as_str().unwrap_or_default().to_string())
            .unwrap_or_default();
        rows.push(vec![
            "0".into(),
            c.kind.name().into(),
            mode.clone(),
            c.reported.to_string(),
            c.classical.to_string(),
        ]);
        for run in &r.runs {
            rows.push(vec![
                (run.index + 1).to_string(),
                c.kind.name().into(),
                mode.clone(),
                run.observables[k].scaled.to_string(),
                c.classical.to_string(),
            ]);
        }
    }
    (header, rows)
}

/// Writes the report into `dir` and returns the paths written.
pub fn report(r: &RunReport, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    if matches!(format, ReportFormat::Json | ReportFormat::All) {
        let p = dir.join(REPORT_JSON);
        write_json(&p, r)?;
        out.push(p);
    }
    if matches!(format, ReportFormat::Csv | ReportFormat::All) {
        let tables: [(&str, Table); 4] = [
            (SOLUTION_CSV, solution_rows(r)),
            (STATEPREP_CSV, stateprep_rows(r)),
            (NORMS_CSV, norm_rows(r)),
            (OBSERVABLES_CSV, observable_rows(r)),
        ];
        for (name, (header, rows)) in tables {
            if name == OBSERVABLES_CSV && r.observables.is_empty() {
                continue;
            }
            let p = dir.join(name);
            write_rows(&p, &header, &rows)?;
            out.push(p);
        }
    }
    Ok(out)
}
