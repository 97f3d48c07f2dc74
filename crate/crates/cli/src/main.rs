use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hhl_core::hamsim::{self, H3Mode, ToeplitzDecomposition};
use hhl_core::inversion::{lemma8_bound, PiecewiseChebyshev};
use hhl_core::mpf;
use hhl_core::observables::{Mode, ObservableKind, ObservableRequest};
use hhl_core::pipeline::{self, Overrides, ReportFormat, SPEC_VERSION};
use hhl_core::Problem;

#[derive(Parser)]
#[command(name = "hhl", version, about = "Desk-scale HHL for tridiagonal Toeplitz systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write JSON and CSV reports.
    Solve(SolveArgs),
    /// Simulate the loader and compare its amplitudes with the right-hand side.
    Stateprep(StateprepArgs),
    /// Strang-splitting error against the exact evolution.
    HamsimBench(HamsimArgs),
    /// Multi-product errors, bounds and the cost comparison.
    MpfBench(MpfArgs),
    /// Per-interval errors of the piecewise-Chebyshev inversion.
    InvertFit(InvertArgs),
    /// Estimate a single observable of the solution.
    Observe(ObserveArgs),
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Overrides the problem file's epsilon.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    no_extrapolation: bool,
    #[arg(long)]
    force_l: Option<usize>,
    /// Base Trotter exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    base_m: Option<Vec<u64>>,
    #[arg(long)]
    n_l: Option<usize>,
    /// Use the published simulator settings (c = 0.1 on the raw polynomial, base exponents 2,3,4).
    #[arg(long)]
    paper_preset: bool,
    #[arg(long)]
    exact_stateprep: bool,
    #[arg(long)]
    exact_evolution: bool,
    #[arg(long)]
    exact_inversion: bool,
    /// Skip phase estimation and invert in the exact eigenbasis.
    #[arg(long)]
    oracle_inversion: bool,
    #[arg(long, value_enum, default_value_t = H3Arg::Flag)]
    h3_mode: H3Arg,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the extrapolation runs on a thread pool.
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum H3Arg {
    Flag,
    Cblock,
}

impl From<H3Arg> for H3Mode {
    fn from(a: H3Arg) -> Self {
        match a {
            H3Arg::Flag => H3Mode::Flag,
            H3Arg::Cblock => H3Mode::CBlock,
        }
    }
}

impl PlanArgs {
    fn problem(&self) -> Result<Problem> {
        let text = fs::read_to_string(&self.problem).with_context(|| format!("reading {}", self.problem.display()))?;
        Ok(Problem::from_json(&text)?)
    }

    fn overrides(&self) -> Overrides {
        let base = if self.paper_preset {
            Overrides::paper_preset()
        } else {
            Overrides::default()
        };
        Overrides {
            epsilon: self.epsilon,
            no_extrapolation: self.no_extrapolation,
            force_l: self.force_l,
            base_m: self.base_m.clone().or(base.base_m),
            n_l: self.n_l,
            exact_stateprep: self.exact_stateprep,
            exact_evolution: self.exact_evolution,
            exact_inversion: self.exact_inversion,
            oracle_inversion: self.oracle_inversion,
            h3_mode: self.h3_mode.into(),
            shots: self.shots,
            seed: self.seed,
            parallel: self.parallel,
            ..base
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    plan: PlanArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StateprepArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Loader constant applied to the raw polynomial.
    #[arg(long)]
    c: Option<f64>,
    /// Degree of the Chebyshev fit replacing the right-hand-side polynomial.
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HamsimArgs {
    #[arg(long, default_value_t = 2)]
    n_b: usize,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = -1.0 / 3.0, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
    m: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    k: Vec<u64>,
    #[arg(long, value_enum, default_value_t = H3Arg::Flag)]
    h3_mode: H3Arg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MpfArgs {
    #[arg(long, default_value_t = 2)]
    n_b: usize,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = -1.0 / 3.0, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 3)]
    l_max: usize,
    /// Accuracy for the cost comparison.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Directory receiving `mpf.csv` and `cost.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InvertArgs {
    #[arg(long, default_value_t = 4.0)]
    c: f64,
    #[arg(long, default_value_t = 16.0)]
    a_start: f64,
    #[arg(long, default_value_t = 6)]
    n_l: usize,
    #[arg(long, value_delimiter = ',', default_value = "3,5,8")]
    d: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Norm,
    QuadraticForm,
    AbsoluteAverage,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    PostSelected,
    FullRun,
}

#[derive(Args)]
struct ObserveArgs {
    #[command(flatten)]
    plan: PlanArgs,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Diagonal of `B`; defaults to the problem's `a`.
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    /// Off-diagonal of `B`; defaults to the problem's `b`.
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::PostSelected)]
    mode: ModeArg,
    /// JSON output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut text = header.join(",");
    text.push('\n');
    for r in rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn solve(args: &SolveArgs) -> Result<()> {
    let problem = args.plan.problem()?;
    let plan = pipeline::plan(&problem, &args.plan.overrides())?;
    for w in &plan.warnings {
        log::warn!("{w}");
    }
    let start = std::time::Instant::now();
    let report = pipeline::run(&plan)?;
    log::info!("{} runs in {:.2?}", plan.l, start.elapsed());
    let files = pipeline::report(&report, &args.out, ReportFormat::All)?;
    println!(
        "n_l={} l={} qubits={} error={:.3e} fidelity={:.6}",
        plan.n_l, plan.l, plan.qubits, report.combined.error, report.combined.fidelity
    );
    for r in &report.runs {
        println!("run {} m={} error={:.3e}", r.index + 1, r.base_m, r.error);
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn stateprep(args: &StateprepArgs) -> Result<()> {
    let text = fs::read_to_string(&args.problem)?;
    let problem = Problem::from_json(&text)?;
    let ov = Overrides {
        epsilon: args.epsilon,
        raw_poly_c: args.c,
        poly_degree: args.degree,
        ..Overrides::default()
    };
    let plan = pipeline::plan(&problem, &ov)?;
    let check = pipeline::stateprep_check(&plan)?;
    let rows: Vec<Vec<String>> = (0..check.raw.len())
        .map(|i| {
            vec![
                i.to_string(),
                check.target[i].to_string(),
                check.normalized[i].to_string(),
                (check.normalized[i] - check.target[i]).abs().to_string(),
            ]
        })
        .collect();
    write_csv(&args.out, &["i", "target", "achieved", "abs_error"], &rows)?;
    println!(
        "c={} success_probability={:.6e} error={:.3e} cnots={}",
        plan.loader.c, check.success_probability, check.error, check.cnot_equivalents
    );
    Ok(())
}

fn hamsim_bench(args: &HamsimArgs) -> Result<()> {
    let d = ToeplitzDecomposition::new(args.n_b, args.a, args.b).with_h3_mode(args.h3_mode.into());
    let mut rows = Vec::new();
    for &k in &args.k {
        for &m in &args.m {
            let err = hamsim::trotter_error(&d, args.t, m, k)?;
            rows.push(vec![
                args.n_b.to_string(),
                args.a.to_string(),
                args.b.to_string(),
                args.t.to_string(),
                m.to_string(),
                k.to_string(),
                err.to_string(),
                hamsim::trotter_lemma_bound(args.t, m, k, args.b).to_string(),
            ]);
        }
    }
    write_csv(
        &args.out,
        &["n_b", "a", "b", "t", "m", "k", "measured_error", "lemma_bound"],
        &rows,
    )
}

fn mpf_bench(args: &MpfArgs) -> Result<()> {
    let d = ToeplitzDecomposition::new(args.n_b, args.a, args.b);
    let exact = hamsim::reference_evolution(&d, args.t);
    let mut rows = Vec::new();
    for l in 1..=args.l_max {
        let m_vec: Vec<u64> = (1..=l as u64).collect();
        let v = mpf::v_l_matrix(&d, args.t, &m_vec)?;
        let measured = hhl_core::linalg::spectral_norm(&exact.sub(&v));
        let bound = mpf::mpf_error_bound(args.b.abs(), args.t, l, &m_vec);
        let ms: Vec<String> = m_vec.iter().map(u64::to_string).collect();
        rows.push(vec![
            l.to_string(),
            ms.join(" "),
            bound.to_string(),
            measured.to_string(),
        ]);
    }
    fs::create_dir_all(&args.out)?;
    write_csv(&args.out.join("mpf.csv"), &["l", "m_vec", "bound", "measured"], &rows)?;

    let spectrum = d.matrix().spectrum_summary()?;
    let budget = pipeline::Budget::split(args.epsilon);
    let n_l = hhl_core::inversion::lemma_n_l(spectrum.kappa, budget.eps_r);
    let t = hhl_core::qpe::default_time(n_l, spectrum.lambda_max);
    let l = mpf::optimal_l(args.b.abs(), t, budget.eps_a);
    let step = d.strang_step(1.0)?.metadata().cnot_equivalents as f64;
    let cost = mpf::qpe_cost_model(n_l, l, step, t, args.b, budget.eps_a)?;
    let cost_rows = vec![vec![
        n_l.to_string(),
        l.to_string(),
        step.to_string(),
        cost.extrapolated_cost.to_string(),
        cost.plain_cost.to_string(),
        cost.closed_form_bound.to_string(),
        cost.summed_bound.to_string(),
    ]];
    write_csv(
        &args.out.join("cost.csv"),
        &[
            "n_l",
            "l",
            "cnots_per_step",
            "extrapolated",
            "plain",
            "closed_form_bound",
            "summed_bound",
        ],
        &cost_rows,
    )
}

fn invert_fit(args: &InvertArgs) -> Result<()> {
    let mut rows = Vec::new();
    for &d in &args.d {
        let pc = PiecewiseChebyshev::fit(args.a_start, args.c, d, args.n_l)?;
        let bound = lemma8_bound(args.a_start, args.c, d);
        for (i, (seg, err)) in pc.intervals.iter().zip(pc.interval_errors()).enumerate() {
            rows.push(vec![
                i.to_string(),
                seg.lo.to_string(),
                seg.hi.to_string(),
                d.to_string(),
                err.to_string(),
                bound.to_string(),
            ]);
        }
    }
    write_csv(
        &args.out,
        &["interval", "lo", "hi", "d", "measured_sup_error", "lemma8_bound"],
        &rows,
    )
}

fn observe(args: &ObserveArgs) -> Result<()> {
    let problem = args.plan.problem()?;
    let kind = match args.kind {
        KindArg::Norm => ObservableKind::Norm,
        KindArg::AbsoluteAverage => ObservableKind::AbsoluteAverage,
        KindArg::QuadraticForm => ObservableKind::QuadraticForm {
            p: args.p.unwrap_or(problem.a),
            q: args.q.unwrap_or(problem.b),
        },
    };
    let mode = match args.mode {
        ModeArg::PostSelected => Mode::PostSelected,
        ModeArg::FullRun => Mode::FullRun,
    };
    let ov = Overrides {
        observables: Some(vec![ObservableRequest { kind, mode }]),
        ..args.plan.overrides()
    };
    let plan = pipeline::plan(&problem, &ov)?;
    let report = pipeline::run(&plan)?;
    let combined = &report.observables[0];
    let exact: Vec<_> = report.runs.iter().map(|r| &r.observables[0]).collect();
    let shot: Vec<_> = report.runs.iter().filter_map(|r| r.shot_observables.first()).collect();
    let value = json!({
        "spec_version": SPEC_VERSION,
        "kind": kind,
        "mode": mode,
        "raw": exact.iter().map(|r| &r.raw).collect::<Vec<_>>(),
        "scaled": combined.reported,
        "scaling_factor": exact[0].scaling_factor,
        "shots": plan.shots,
        "shot_scaled": combined.shot_scaled,
        "shot_raw": shot.iter().map(|r| &r.raw).collect::<Vec<_>>(),
        "stderr": combined.shot_stderr,
        "classical": combined.classical,
        "a_vec": plan.extrapolation.a_vec,
    });
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    match &args.out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Stateprep(a) => stateprep(a),
        Command::HamsimBench(a) => hamsim_bench(a),
        Command::MpfBench(a) => {
            if a.l_max == 0 {
                bail!("--l-max must be at least 1");
            }
            mpf_bench(a)
        }
        Command::InvertFit(a) => invert_fit(a),
        Command::Observe(a) => observe(a),
    }
}
