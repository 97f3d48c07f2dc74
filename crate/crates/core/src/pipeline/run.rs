//! Execution of the `l` runs and their classical combination.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::plan::{EvolutionMode, InversionMode, LoaderMode, RunPlan};
use crate::error::{Error, Result};
use crate::hamsim::ToeplitzDecomposition;
use crate::inversion::{exact_angles, fitted_angles, inversion_target, rotation_circuit, PiecewiseChebyshev};
use crate::mpf::{combine_scalars, combine_vectors};
use crate::observables::{self, Mode, ObservableContext, ObservableKind, ObservableReport};
use crate::qpe::{build_qpe, EvolutionSource, QpeConfig, QpeLayout};
use crate::sim::{CMatrix, GateMetadata, Instruction, QuantumCircuit, StateVector};
use crate::stateprep::{build_exact_loader, build_loader, LoaderConfig};
use crate::toeplitz::{norm2, ClassicalSolution};

/// Wire assignment of the full circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PipelineLayout {
    pub width: usize,
    pub system: Vec<usize>,
    pub flag: usize,
    pub register: Vec<usize>,
    pub inversion: usize,
    pub stateprep: usize,
}

impl PipelineLayout {
    /// System, flag, register, inversion ancilla, state-preparation ancilla.
    pub fn new(n_b: usize, n_l: usize) -> Self {
        Self {
            width: n_b + n_l + 3,
            system: (0..n_b).collect(),
            flag: n_b,
            register: (n_b + 1..n_b + 1 + n_l).collect(),
            inversion: n_b + 1 + n_l,
            stateprep: n_b + 2 + n_l,
        }
    }

    pub fn qpe(&self) -> QpeLayout {
        QpeLayout {
            width: self.width,
            system: self.system.clone(),
            flag: self.flag,
            register: self.register.clone(),
        }
    }

    /// Both ancillas in |1⟩, register in |0⟩, flag in |1⟩.
    pub fn success_pattern(&self) -> Vec<(usize, bool)> {
        let mut p: Vec<(usize, bool)> = self.register.iter().map(|&q| (q, false)).collect();
        p.extend([(self.inversion, true), (self.stateprep, true), (self.flag, true)]);
        p
    }
}

/// Complex vector split into parts for serialization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexVec {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&[Complex<f64>]> for ComplexVec {
    fn from(v: &[Complex<f64>]) -> Self {
        Self {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }
}

/// One of the `l` independent runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub index: usize,
    pub base_m: u64,
    /// Trotter steps of power `2^s` at position `s`.
    pub m_per_power: Vec<u64>,
    /// Probability of the state-preparation ancilla in |1⟩.
    pub stateprep_probability: f64,
    /// Probability of the full success pattern.
    pub success_probability: f64,
    /// Success probability conditioned on successful state preparation.
    pub inversion_probability: f64,
    /// Projected system amplitudes before normalization.
    pub raw: ComplexVec,
    pub normalized: ComplexVec,
    /// Real part of `raw` scaled by `√N‖b⃗‖_∞/(c·C)`, an estimate of `x⃗`.
    pub rescaled: Vec<f64>,
    /// `‖b⃗‖√P/C` from the conditioned success probability.
    pub norm_estimate: f64,
    /// `‖|x⟩ − |x̃⟩‖`.
    pub error: f64,
    pub fidelity: f64,
    pub observables: Vec<ObservableReport>,
    pub shot_observables: Vec<ObservableReport>,
    pub gates: GateMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedSolution {
    /// `Σ a_j |x̃_j⟩`.
    pub raw: ComplexVec,
    pub raw_norm: f64,
    pub normalized: ComplexVec,
    pub rescaled: Vec<f64>,
    pub norm_estimate: f64,
    pub error: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedObservable {
    pub kind: ObservableKind,
    pub mode: Mode,
    /// `Σ a_j s_j` over the runs.
    pub scaled: f64,
    /// `scaled` clamped to the admissible range (non-negative for norm and average).
    pub reported: f64,
    pub classical: f64,
    pub shot_scaled: Option<f64>,
    pub shot_stderr: Option<f64>,
}

/// Amplitudes produced by the state-preparation circuit alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatePrepCheck {
    /// Branch amplitudes with the ancilla in |1⟩.
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    /// `b⃗/‖b⃗‖`.
    pub target: Vec<f64>,
    /// `raw·√N‖b⃗‖_∞/c_eff`, an estimate of `b⃗`.
    pub recovered: Vec<f64>,
    pub success_probability: f64,
    pub error: f64,
    pub cnot_equivalents: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resources {
    pub qubits: usize,
    /// `Σ_j Σ_k m_j(2^k)`.
    pub trotter_step_total: u64,
    /// `Σ_j Σ_k 2^k·m_j(2^k)`.
    pub executed_steps: u64,
    pub loader_cnot_equivalents: u64,
    /// `Ry` gates of the first run, loader included.
    pub ry_gates: u64,
    /// `(1/P, ⌈1/√P⌉)` for the loader.
    pub stateprep_repetitions: (f64, f64),
    /// `(1/P, κ/(1 − ε_R))` for the inversion ancilla, first run.
    pub inversion_repetitions: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub spec_version: &'static str,
    pub plan: RunPlan,
    pub classical: ClassicalSolution<f64>,
    pub stateprep: StatePrepCheck,
    pub runs: Vec<RunOutcome>,
    pub combined: CombinedSolution,
    pub observables: Vec<CombinedObservable>,
    pub resources: Resources,
}

fn loader_circuit(plan: &RunPlan) -> Result<QuantumCircuit<f64>> {
    match plan.loader.mode {
        LoaderMode::Polynomial => {
            build_loader(&LoaderConfig::new(plan.loader.poly.clone(), plan.loader.c, plan.n_b())?)
        }
        LoaderMode::Exact => build_exact_loader(&plan.problem.rhs.values::<f64>(1 << plan.n_b())),
    }
}

/// Runs the loader alone and compares its branch with `b⃗/‖b⃗‖`.
pub fn stateprep_check(plan: &RunPlan) -> Result<StatePrepCheck> {
    let n_b = plan.n_b();
    let n = 1usize << n_b;
    let circ = loader_circuit(plan)?;
    let state = crate::sim::apply(&circ, &StateVector::zero(n_b + 1))?;
    let raw: Vec<f64> = state
        .branch_amplitudes(&(0..n_b).collect::<Vec<_>>(), &[(n_b, true)])
        .iter()
        .map(|z| z.re)
        .collect();
    let p = raw.iter().map(|v| v * v).sum::<f64>();
    if p <= 0.0 {
        return Err(Error::ImpossibleOutcome);
    }
    let normalized: Vec<f64> = raw.iter().map(|v| v / p.sqrt()).collect();
    let b = plan.problem.rhs.values::<f64>(n);
    let nb = norm2(&b);
    let inf = crate::toeplitz::norm_inf(&b);
    let target: Vec<f64> = b.iter().map(|v| v / nb).collect();
    let scale = (n as f64).sqrt() * inf / plan.loader.c_effective;
    Ok(StatePrepCheck {
        recovered: raw.iter().map(|v| v * scale).collect(),
        error: normalized
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt(),
        raw,
        normalized,
        target,
        success_probability: p,
        cnot_equivalents: circ.metadata().cnot_equivalents,
    })
}

/// `Σ_j |u_j⟩⟨u_j| ⊗ Ry(2 arcsin(min(1, λ_min/λ_j)))` on `[ancilla, system…]`.
pub fn oracle_inversion_matrix(plan: &RunPlan) -> Result<CMatrix<f64>> {
    let m = plan.problem.matrix();
    let n = m.dim();
    let c = plan.spectrum.lambda_min;
    let mut u = CMatrix::zeros(2 * n);
    for j in 1..=n {
        let v = m.eigenvector(j)?;
        let theta = inversion_target(c, m.eigenvalue(j)?);
        let (s, co) = theta.sin_cos();
        let ry = [[co, -s], [s, co]];
        for r in 0..n {
            for col in 0..n {
                let w = v[r] * v[col];
                for (a_out, row) in ry.iter().enumerate() {
                    for (a_in, &g) in row.iter().enumerate() {
                        let (i, k) = (r << 1 | a_out, col << 1 | a_in);
                        u.set(i, k, u.get(i, k) + Complex::new(w * g, 0.0));
                    }
                }
            }
        }
    }
    Ok(u)
}

/// Complete circuit of run `run` (index into the extrapolation exponents).
pub fn build_circuit(plan: &RunPlan, run: usize) -> Result<QuantumCircuit<f64>> {
    if plan.qubits > super::plan::MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "qubits",
            got: plan.qubits,
            limit: super::plan::MAX_QUBITS,
        });
    }
    if run >= plan.l {
        return Err(Error::IndexOutOfRange { index: run, n: plan.l });
    }
    let n_b = plan.n_b();
    let layout = PipelineLayout::new(n_b, plan.n_l);
    let mut c = QuantumCircuit::new(layout.width);
    c.x(layout.flag)?;
    let mut load_wires = layout.system.clone();
    load_wires.push(layout.stateprep);
    c.append_on(&loader_circuit(plan)?, &load_wires)?;

    if plan.inversion_mode == InversionMode::Oracle {
        let mut wires = vec![layout.inversion];
        wires.extend(&layout.system);
        c.push(Instruction::Oracle {
            matrix: oracle_inversion_matrix(plan)?,
            wires,
            controls: Vec::new(),
            label: "eigenbasis_inversion".into(),
        })?;
        return Ok(c);
    }

    let decomp = ToeplitzDecomposition::new(n_b, plan.problem.a, plan.problem.b).with_h3_mode(plan.h3_mode);
    let evolution = match plan.evolution_mode {
        EvolutionMode::Exact => EvolutionSource::Exact,
        EvolutionMode::Strang => EvolutionSource::Strang {
            m_per_power: plan.extrapolation.powers.iter().map(|p| p.m[run]).collect(),
        },
    };
    let config = QpeConfig {
        n_l: plan.n_l,
        t: plan.t,
        evolution,
    };
    let qpe = build_qpe(&config, &decomp, &layout.qpe())?;
    let angles = match plan.inversion_mode {
        InversionMode::Exact => exact_angles(plan.inversion.c_prime, plan.n_l),
        _ => {
            let pc = PiecewiseChebyshev::fit_clamped(
                plan.inversion.a_start,
                plan.inversion.c_prime,
                plan.inversion.d,
                plan.n_l,
            )?;
            fitted_angles(&pc)
        }
    };
    c.append(&qpe)?;
    c.append(&rotation_circuit(
        &angles,
        &layout.register,
        layout.inversion,
        layout.width,
    )?)?;
    c.append(&qpe.inverse())?;
    Ok(c)
}

pub fn observable_context(plan: &RunPlan, classical: &ClassicalSolution<f64>) -> ObservableContext {
    let layout = PipelineLayout::new(plan.n_b(), plan.n_l);
    ObservableContext {
        system: layout.system.clone(),
        register: layout.register.clone(),
        inversion_ancilla: layout.inversion,
        stateprep_ancilla: Some(layout.stateprep),
        fixed: vec![(layout.flag, true)],
        c_rot: plan.spectrum.lambda_min,
        c_load: plan.loader.c_effective,
        norm_b: classical.norm_b,
        norm_b_inf: classical.norm_b_inf,
    }
}

fn distance(x: &[f64], y: &[Complex<f64>]) -> (f64, f64) {
    let err = x.iter().zip(y).map(|(a, b)| (b - a).norm_sqr()).sum::<f64>().sqrt();
    let overlap: Complex<f64> = x.iter().zip(y).map(|(a, b)| b * a).sum();
    (err, overlap.norm_sqr())
}

/// Simulates the final state of run `run`.
pub fn simulate(plan: &RunPlan, run: usize) -> Result<StateVector<f64>> {
    let circuit = build_circuit(plan, run)?;
    crate::sim::apply(&circuit, &StateVector::zero(circuit.n_qubits()))
}

fn execute(plan: &RunPlan, run: usize, classical: &ClassicalSolution<f64>) -> Result<RunOutcome> {
    let circuit = build_circuit(plan, run)?;
    let state = crate::sim::apply(&circuit, &StateVector::zero(circuit.n_qubits()))?;
    let layout = PipelineLayout::new(plan.n_b(), plan.n_l);
    let p_sp = state.probability(layout.stateprep, true);
    let amps = state.branch_amplitudes(&layout.system, &layout.success_pattern());
    let p = amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if p <= f64::EPSILON * f64::EPSILON || p_sp <= 0.0 {
        return Err(Error::ImpossibleOutcome);
    }
    let normalized: Vec<Complex<f64>> = amps.iter().map(|z| z / p.sqrt()).collect();
    let n = amps.len() as f64;
    let c_rot = plan.spectrum.lambda_min;
    let scale = n.sqrt() * classical.norm_b_inf / (plan.loader.c_effective * c_rot);
    let (error, fidelity) = distance(&classical.x_normalized, &normalized);

    let ctx = observable_context(plan, classical);
    let post = if plan.observables.iter().any(|r| r.mode == Mode::PostSelected) {
        Some(state.post_select(layout.stateprep, true)?.1)
    } else {
        None
    };
    let mut reports = Vec::with_capacity(plan.observables.len());
    let mut shot_reports = Vec::new();
    for (k, req) in plan.observables.iter().enumerate() {
        let s = match req.mode {
            Mode::PostSelected => post.as_ref().expect("post-selected state computed"),
            Mode::FullRun => &state,
        };
        let rep = observables::measure(s, &ctx, req)?;
        if let Some(shots) = plan.shots {
            let seed = plan.seed ^ ((run as u64) << 32 | k as u64);
            shot_reports.push(observables::shot_estimate(&rep, &ctx, shots, seed)?);
        }
        reports.push(rep);
    }
    let inversion_probability = p / p_sp;
    let base = plan.extrapolation.m_vec[run];
    Ok(RunOutcome {
        index: run,
        base_m: base,
        m_per_power: plan.extrapolation.powers.iter().map(|pw| pw.m[run]).collect(),
        stateprep_probability: p_sp,
        success_probability: p,
        inversion_probability,
        rescaled: amps.iter().map(|z| z.re * scale).collect(),
        raw: ComplexVec::from(amps.as_slice()),
        normalized: ComplexVec::from(normalized.as_slice()),
        norm_estimate: classical.norm_b * inversion_probability.sqrt() / c_rot,
        error,
        fidelity,
        observables: reports,
        shot_observables: shot_reports,
        gates: circuit.metadata(),
    })
}

fn to_complex(v: &ComplexVec) -> Vec<Complex<f64>> {
    v.re.iter().zip(&v.im).map(|(&re, &im)| Complex::new(re, im)).collect()
}

/// Executes the plan and combines the runs.
pub fn run(plan: &RunPlan) -> Result<RunReport> {
    let classical = plan.classical()?;
    let runs: Vec<RunOutcome> = if plan.parallel {
        (0..plan.l)
            .into_par_iter()
            .map(|j| execute(plan, j, &classical))
            .collect::<Result<_>>()?
    } else {
        (0..plan.l)
            .map(|j| execute(plan, j, &classical))
            .collect::<Result<_>>()?
    };
    let a = &plan.extrapolation.a_vec;
    let vectors: Vec<Vec<Complex<f64>>> = runs.iter().map(|r| to_complex(&r.normalized)).collect();
    let raw = combine_vectors(&vectors, a)?;
    let raw_norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if raw_norm == 0.0 {
        return Err(Error::ImpossibleOutcome);
    }
    let normalized: Vec<Complex<f64>> = raw.iter().map(|z| z / raw_norm).collect();
    let (error, fidelity) = distance(&classical.x_normalized, &normalized);
    let dim = classical.x_raw.len();
    let rescaled = (0..dim)
        .map(|i| combine_scalars(&runs.iter().map(|r| r.rescaled[i]).collect::<Vec<_>>(), a))
        .collect::<Result<Vec<_>>>()?;
    let norm_estimate = combine_scalars(&runs.iter().map(|r| r.norm_estimate).collect::<Vec<_>>(), a)?;
    let combined = CombinedSolution {
        raw: ComplexVec::from(raw.as_slice()),
        raw_norm,
        normalized: ComplexVec::from(normalized.as_slice()),
        rescaled,
        norm_estimate,
        error,
        fidelity,
    };

    let mut combined_obs = Vec::with_capacity(plan.observables.len());
    for (k, req) in plan.observables.iter().enumerate() {
        let scaled = combine_scalars(&runs.iter().map(|r| r.observables[k].scaled).collect::<Vec<_>>(), a)?;
        let (shot_scaled, shot_stderr) = if plan.shots.is_some() {
            let vals: Vec<f64> = runs.iter().map(|r| r.shot_observables[k].scaled).collect();
            let var: f64 = runs
                .iter()
                .zip(a)
                .map(|(r, aj)| (aj * r.shot_observables[k].stderr.unwrap_or(0.0)).powi(2))
                .sum();
            (Some(combine_scalars(&vals, a)?), Some(var.sqrt()))
        } else {
            (None, None)
        };
        let reported = match req.kind {
            ObservableKind::QuadraticForm { .. } => scaled,
            _ => scaled.max(0.0),
        };
        combined_obs.push(CombinedObservable {
            kind: req.kind,
            mode: req.mode,
            scaled,
            reported,
            classical: observables::classical_value(&req.kind, &classical.x_raw),
            shot_scaled,
            shot_stderr,
        });
    }

    let stateprep = stateprep_check(plan)?;
    let first = &runs[0];
    let ry_gates = first.gates.by_kind.get("ry").copied().unwrap_or(0);
    let resources = Resources {
        qubits: plan.qubits,
        trotter_step_total: plan.extrapolation.trotter_step_total(),
        executed_steps: plan.extrapolation.executed_steps(),
        loader_cnot_equivalents: stateprep.cnot_equivalents,
        ry_gates,
        stateprep_repetitions: (
            1.0 / stateprep.success_probability,
            (1.0 / stateprep.success_probability.sqrt()).ceil(),
        ),
        inversion_repetitions: observables::expected_repetitions(
            first.inversion_probability,
            plan.spectrum.kappa,
            plan.budget.eps_r,
        ),
    };
    Ok(RunReport {
        spec_version: super::SPEC_VERSION,
        plan: plan.clone(),
        classical,
        stateprep,
        runs,
        combined,
        observables: combined_obs,
        resources,
    })
}
