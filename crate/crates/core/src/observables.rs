//! Observable circuits and their classical post-processing.
//!
//! All measurements condition on the inversion ancilla in |1⟩ and the
//! eigenvalue register in |0…0⟩, plus the state-preparation ancilla in |1⟩.
//! In `PostSelected` mode the state is assumed to have been projected on a
//! successful state preparation already, which only changes the scaling law.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::{QuantumCircuit, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// State preparation was checked before the rest of the algorithm ran.
    PostSelected,
    /// The full circuit ran once; both ancillas are measured at the end.
    FullRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableKind {
    Norm,
    /// `x⃗ᵀBx⃗` for the Toeplitz `B` with diagonal `p` and off-diagonal `q`.
    QuadraticForm {
        p: f64,
        q: f64,
    },
    AbsoluteAverage,
}

impl ObservableKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObservableKind::Norm => "norm",
            ObservableKind::QuadraticForm { .. } => "quadratic_form",
            ObservableKind::AbsoluteAverage => "absolute_average",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableRequest {
    pub kind: ObservableKind,
    pub mode: Mode,
}

/// Where the relevant wires live and the constants of the scaling laws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableContext {
    pub system: Vec<usize>,
    pub register: Vec<usize>,
    pub inversion_ancilla: usize,
    /// `None` when no state-preparation ancilla exists.
    pub stateprep_ancilla: Option<usize>,
    /// Any other wire that must read a fixed value (the ham-sim flag).
    pub fixed: Vec<(usize, bool)>,
    /// Rotation constant `C` in eigenvalue units.
    pub c_rot: f64,
    /// Effective loader constant: branch amplitude `≈ c·b_i/‖b⃗‖_∞`.
    pub c_load: f64,
    pub norm_b: f64,
    pub norm_b_inf: f64,
}

impl ObservableContext {
    fn n(&self) -> f64 {
        (1u64 << self.system.len()) as f64
    }

    fn success_pattern(&self) -> Vec<(usize, bool)> {
        let mut p: Vec<(usize, bool)> = self.register.iter().map(|&q| (q, false)).collect();
        p.push((self.inversion_ancilla, true));
        if let Some(s) = self.stateprep_ancilla {
            p.push((s, true));
        }
        p.extend(self.fixed.iter().copied());
        p
    }

    /// Factor `S` with `‖x⃗‖² = S·P` for the success probability `P`.
    fn square_scale(&self, mode: Mode) -> f64 {
        match mode {
            Mode::PostSelected => self.norm_b.powi(2) / self.c_rot.powi(2),
            Mode::FullRun => self.n() * self.norm_b_inf.powi(2) / (self.c_load * self.c_rot).powi(2),
        }
    }
}

/// A categorical outcome group: probabilities of named disjoint events of one circuit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeGroup {
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableReport {
    pub kind: ObservableKind,
    pub mode: Mode,
    /// Norm and average: `[P]`. Quadratic form: `[P_norm, d_1, …, d_{n_b}]` with `d_k = n_k(0) − n_k(1)`.
    pub raw: Vec<f64>,
    pub scaled: f64,
    pub scaling_factor: f64,
    /// `None` for exact probabilities.
    pub shots: Option<u64>,
    pub stderr: Option<f64>,
    /// Underlying event probabilities, one group per measured circuit.
    pub outcomes: Vec<OutcomeGroup>,
}

/// Index sets of the quadratic-form family: observable `k ∈ 1..=n_b` covers
/// the pairs `(i, i+1)` with `i ≡ 2^{k−1} − 1 (mod 2^k)`, `i ≤ N − 2`.
pub fn pair_indices(n_b: usize, k: usize) -> Vec<usize> {
    let n = 1usize << n_b;
    let m = 1usize << k;
    (0..n.saturating_sub(1)).filter(|i| i % m == m / 2 - 1).collect()
}

/// Circuit of observable `k` on the system wires: CNOTs from `q_{k−1}` onto
/// `q_0 … q_{k−2}`, then `H` on `q_{k−1}`.
pub fn quadratic_form_circuit<T: Real>(width: usize, system: &[usize], k: usize) -> Result<QuantumCircuit<T>> {
    if k == 0 || k > system.len() {
        return Err(Error::InvalidArgument(format!(
            "observable index {k} outside 1..={}",
            system.len()
        )));
    }
    let mut c = QuantumCircuit::new(width);
    let top = system[k - 1];
    for &q in &system[..k - 1] {
        c.cx(top, q)?;
    }
    c.h(top)?;
    Ok(c)
}

/// `H` on every system wire.
pub fn average_circuit<T: Real>(width: usize, system: &[usize]) -> Result<QuantumCircuit<T>> {
    let mut c = QuantumCircuit::new(width);
    for &q in system {
        c.h(q)?;
    }
    Ok(c)
}

fn nonzero(p: f64) -> Result<f64> {
    if p <= 0.0 {
        Err(Error::ImpossibleOutcome)
    } else {
        Ok(p)
    }
}

pub fn measure_norm<T: Real>(state: &StateVector<T>, ctx: &ObservableContext, mode: Mode) -> Result<ObservableReport> {
    let p = nonzero(state.pattern_probability(&ctx.success_pattern()).to_f64_lossy())?;
    Ok(norm_report(p, ctx, mode))
}

fn norm_report(p: f64, ctx: &ObservableContext, mode: Mode) -> ObservableReport {
    let s = ctx.square_scale(mode).sqrt();
    ObservableReport {
        kind: ObservableKind::Norm,
        mode,
        raw: vec![p],
        scaled: s * p.sqrt(),
        scaling_factor: s,
        shots: None,
        stderr: None,
        outcomes: vec![OutcomeGroup { probabilities: vec![p] }],
    }
}

pub fn measure_quadratic_form<T: Real>(
    state: &StateVector<T>,
    ctx: &ObservableContext,
    p: f64,
    q: f64,
    mode: Mode,
) -> Result<ObservableReport> {
    let base = ctx.success_pattern();
    let p_norm = nonzero(state.pattern_probability(&base).to_f64_lossy())?;
    let mut outcomes = vec![OutcomeGroup {
        probabilities: vec![p_norm],
    }];
    for k in 1..=ctx.system.len() {
        let circ = quadratic_form_circuit::<T>(state.n_qubits(), &ctx.system, k)?;
        let mut s = state.clone();
        s.apply(&circ)?;
        let mut pat = base.clone();
        pat.extend(ctx.system[..k - 1].iter().map(|&w| (w, true)));
        let top = ctx.system[k - 1];
        let n0 = s
            .pattern_probability(&[pat.as_slice(), &[(top, false)]].concat())
            .to_f64_lossy();
        let n1 = s
            .pattern_probability(&[pat.as_slice(), &[(top, true)]].concat())
            .to_f64_lossy();
        outcomes.push(OutcomeGroup {
            probabilities: vec![n0, n1],
        });
    }
    Ok(quadratic_report(&outcomes, ctx, p, q, mode))
}

fn quadratic_report(
    outcomes: &[OutcomeGroup],
    ctx: &ObservableContext,
    p: f64,
    q: f64,
    mode: Mode,
) -> ObservableReport {
    let s = ctx.square_scale(mode);
    let p_norm = outcomes[0].probabilities[0];
    let mut raw = vec![p_norm];
    raw.extend(outcomes[1..].iter().map(|g| g.probabilities[0] - g.probabilities[1]));
    let adj: f64 = raw[1..].iter().sum();
    ObservableReport {
        kind: ObservableKind::QuadraticForm { p, q },
        mode,
        scaled: s * (p * p_norm + q * adj),
        raw,
        scaling_factor: s,
        shots: None,
        stderr: None,
        outcomes: outcomes.to_vec(),
    }
}

pub fn measure_absolute_average<T: Real>(
    state: &StateVector<T>,
    ctx: &ObservableContext,
    mode: Mode,
) -> Result<ObservableReport> {
    let circ = average_circuit::<T>(state.n_qubits(), &ctx.system)?;
    let mut s = state.clone();
    s.apply(&circ)?;
    let mut pat = ctx.success_pattern();
    pat.extend(ctx.system.iter().map(|&w| (w, false)));
    let p = s.pattern_probability(&pat).to_f64_lossy();
    Ok(average_report(p, ctx, mode))
}

fn average_report(p: f64, ctx: &ObservableContext, mode: Mode) -> ObservableReport {
    // |Σx|² = N·S·P, average = |Σx|/N.
    let s = (ctx.square_scale(mode) / ctx.n()).sqrt();
    ObservableReport {
        kind: ObservableKind::AbsoluteAverage,
        mode,
        raw: vec![p],
        scaled: s * p.sqrt(),
        scaling_factor: s,
        shots: None,
        stderr: None,
        outcomes: vec![OutcomeGroup { probabilities: vec![p] }],
    }
}

pub fn measure<T: Real>(
    state: &StateVector<T>,
    ctx: &ObservableContext,
    req: &ObservableRequest,
) -> Result<ObservableReport> {
    match req.kind {
        ObservableKind::Norm => measure_norm(state, ctx, req.mode),
        ObservableKind::QuadraticForm { p, q } => measure_quadratic_form(state, ctx, p, q, req.mode),
        ObservableKind::AbsoluteAverage => measure_absolute_average(state, ctx, req.mode),
    }
}

/// Replaces exact probabilities by `shots`-sample frequencies and attaches
/// the delta-method standard error of the scaled value.
pub fn shot_estimate(
    exact: &ObservableReport,
    ctx: &ObservableContext,
    shots: u64,
    seed: u64,
) -> Result<ObservableReport> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = shots as f64;
    let mut sampled = Vec::with_capacity(exact.outcomes.len());
    for g in &exact.outcomes {
        let mut remaining = shots;
        let mut mass = 1.0;
        let mut probs = Vec::with_capacity(g.probabilities.len());
        for &p in &g.probabilities {
            let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
            let draw = Binomial::new(remaining, q)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .sample(&mut rng);
            remaining -= draw;
            mass -= p;
            probs.push(draw as f64 / nf);
        }
        sampled.push(OutcomeGroup { probabilities: probs });
    }
    let mut report = match exact.kind {
        ObservableKind::Norm => norm_report(sampled[0].probabilities[0], ctx, exact.mode),
        ObservableKind::AbsoluteAverage => average_report(sampled[0].probabilities[0], ctx, exact.mode),
        ObservableKind::QuadraticForm { p, q } => quadratic_report(&sampled, ctx, p, q, exact.mode),
    };
    let var_p = |p: f64| p * (1.0 - p) / nf;
    let stderr = match exact.kind {
        ObservableKind::Norm | ObservableKind::AbsoluteAverage => {
            let p = exact.raw[0];
            exact.scaling_factor * var_p(p).sqrt() / (2.0 * p.sqrt())
        }
        ObservableKind::QuadraticForm { p, q } => {
            let mut var = p * p * var_p(exact.outcomes[0].probabilities[0]);
            for g in &exact.outcomes[1..] {
                let (n0, n1) = (g.probabilities[0], g.probabilities[1]);
                var += q * q * (n0 + n1 - (n0 - n1).powi(2)) / nf;
            }
            exact.scaling_factor * var.sqrt()
        }
    };
    report.shots = Some(shots);
    report.stderr = Some(stderr);
    Ok(report)
}

/// Value of the observable on a classical solution `x⃗`.
pub fn classical_value(kind: &ObservableKind, x: &[f64]) -> f64 {
    match *kind {
        ObservableKind::Norm => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        ObservableKind::QuadraticForm { p, q } => {
            let sq: f64 = x.iter().map(|v| v * v).sum();
            let adj: f64 = x.windows(2).map(|w| w[0] * w[1]).sum();
            p * sq + 2.0 * q * adj
        }
        ObservableKind::AbsoluteAverage => x.iter().sum::<f64>().abs() / x.len() as f64,
    }
}

/// Expected repeat-until-success counts: `1/P` and `κ/(1 − ε)`.
pub fn expected_repetitions(p: f64, kappa: f64, eps: f64) -> (f64, f64) {
    (1.0 / p, kappa / (1.0 - eps))
}
