//! Multi-product (Richardson) extrapolation of Strang product formulas.
//!
//! `V_l(t, m⃗) = Σ_j a_j S₁^{m_j}(t/m_j)` with `a_j = Π_{q≠j} m_j²/(m_j² − m_q²)`.
//! The combination is done classically on the outputs of `l` independent
//! runs, never inside a circuit.

use std::collections::BTreeSet;

use num_complex::Complex;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamsim::{system_unitary, ToeplitzDecomposition};
use crate::lambert::lambert_w;
use crate::scalar::Real;
use crate::sim::CMatrix;

fn check_distinct(m_vec: &[u64]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &m in m_vec {
        if m == 0 {
            return Err(Error::InvalidArgument("Trotter exponents must be positive".into()));
        }
        if !seen.insert(m) {
            return Err(Error::DuplicateExponent(m));
        }
    }
    if m_vec.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one Trotter exponent is required".into(),
        ));
    }
    Ok(())
}

/// Closed-form extrapolation weights.
pub fn mpf_coefficients<T: Real>(m_vec: &[u64]) -> Result<Vec<T>> {
    check_distinct(m_vec)?;
    Ok(m_vec
        .iter()
        .enumerate()
        .map(|(j, &mj)| {
            let mj2 = T::of(mj as f64).powi(2);
            m_vec
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != j)
                .fold(T::one(), |acc, (_, &mq)| acc * mj2 / (mj2 - T::of(mq as f64).powi(2)))
        })
        .collect())
}

/// Closed-form weights in exact rational arithmetic.
pub fn mpf_coefficients_exact(m_vec: &[u64]) -> Result<Vec<Ratio<i128>>> {
    check_distinct(m_vec)?;
    Ok(m_vec
        .iter()
        .enumerate()
        .map(|(j, &mj)| {
            let mj2 = i128::from(mj) * i128::from(mj);
            m_vec
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != j)
                .fold(Ratio::from_integer(1), |acc, (_, &mq)| {
                    acc * Ratio::new(mj2, mj2 - i128::from(mq) * i128::from(mq))
                })
        })
        .collect())
}

/// Order `l`, exponents and weights with `Σ a_j = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiProductFormula<T> {
    pub l: usize,
    pub m_vec: Vec<u64>,
    pub a_vec: Vec<T>,
}

impl<T: Real> MultiProductFormula<T> {
    pub fn new(m_vec: Vec<u64>) -> Result<Self> {
        let a_vec = mpf_coefficients(&m_vec)?;
        Ok(Self {
            l: m_vec.len(),
            m_vec,
            a_vec,
        })
    }

    /// `m⃗ = (1, …, l)`.
    pub fn standard(l: usize) -> Result<Self> {
        Self::new((1..=l as u64).collect())
    }
}

/// `2(2dt)^{2l+1}/(2l+1)! · Π 1/m_i²`.
pub fn mpf_error_bound(d_norm: f64, t: f64, l: usize, m_vec: &[u64]) -> f64 {
    let n = 2 * l + 1;
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let log_base = (n as f64) * (2.0 * d_norm * t).ln() - log_fact;
    let prod: f64 = m_vec.iter().map(|&m| 1.0 / (m as f64).powi(2)).product();
    2.0 * log_base.exp() * prod
}

/// Number of extrapolation points for accuracy `eps`, at least 3.
///
/// Returns 1 (with a logged warning) when `2·d·t/eps ≤ 1`, where the formula
/// has no positive solution.
pub fn optimal_l(d_norm: f64, t: f64, eps: f64) -> usize {
    let ratio = 2.0 * d_norm * t / eps;
    if ratio <= 1.0 || !ratio.is_finite() {
        log::warn!("2dt/eps = {ratio} <= 1: extrapolation not needed, using l = 1");
        return 1;
    }
    let lg = ratio.ln();
    let w = lambert_w(lg / (2.0 * std::f64::consts::E * (4.0 * d_norm * t).sqrt()));
    let l = (lg / (4.0 * w)).ceil();
    (l as usize).max(3)
}

/// Dense `Σ a_j S₁^{m_j}(t/m_j)` including the `H₁` phase; generally not unitary.
pub fn v_l_matrix(d: &ToeplitzDecomposition<f64>, t: f64, m_vec: &[u64]) -> Result<CMatrix<f64>> {
    if d.n_b > 6 {
        return Err(Error::SizeCap {
            what: "n_b for dense multi-product matrix",
            got: d.n_b,
            limit: 6,
        });
    }
    let a = mpf_coefficients::<f64>(m_vec)?;
    let mut acc = CMatrix::zeros(d.dim());
    for (&m, &aj) in m_vec.iter().zip(&a) {
        let s = system_unitary(&d.strang_circuit(t, m)?, d.n_b)?;
        acc = acc.add(&s.scale(Complex::new(aj, 0.0)));
    }
    Ok(acc)
}

/// Trotter exponents for the controlled power `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PowerPlan {
    pub k: u64,
    pub alpha: u64,
    /// `m_j(k) = α_k·m_j`.
    pub m: Vec<u64>,
}

/// Per-power exponents for phase estimation, with weights shared by every power.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolationPlan {
    pub l: usize,
    pub m_vec: Vec<u64>,
    pub a_vec: Vec<f64>,
    /// One entry per `k = 2⁰, …, 2^{n_l−1}`.
    pub powers: Vec<PowerPlan>,
}

/// `⌊k^{1/2l}⌋ + 1`, computed without floating-point rounding at exact powers.
pub fn alpha(k: u64, l: usize) -> u64 {
    let e = 2 * l as u32;
    let mut r = (k as f64).powf(1.0 / e as f64).floor() as u64;
    while (r + 1).checked_pow(e).is_some_and(|p| p <= k) {
        r += 1;
    }
    while r > 0 && r.checked_pow(e).is_none_or(|p| p > k) {
        r -= 1;
    }
    r + 1
}

/// Plan with base exponents `(1, …, l)`.
pub fn build_plan(l: usize, n_l: usize) -> Result<ExtrapolationPlan> {
    build_plan_with_base(&(1..=l as u64).collect::<Vec<_>>(), n_l)
}

/// Plan with arbitrary distinct base exponents; `α_k` uses `l = m_vec.len()`.
pub fn build_plan_with_base(m_vec: &[u64], n_l: usize) -> Result<ExtrapolationPlan> {
    if n_l == 0 || n_l > 62 {
        return Err(Error::InvalidArgument(format!("n_l = {n_l} outside 1..=62")));
    }
    let a_vec = mpf_coefficients::<f64>(m_vec)?;
    let l = m_vec.len();
    let powers = (0..n_l)
        .map(|s| {
            let k = 1u64 << s;
            let al = alpha(k, l);
            PowerPlan {
                k,
                alpha: al,
                m: m_vec.iter().map(|&m| al * m).collect(),
            }
        })
        .collect();
    Ok(ExtrapolationPlan {
        l,
        m_vec: m_vec.to_vec(),
        a_vec,
        powers,
    })
}

impl ExtrapolationPlan {
    /// `Σ_j Σ_k m_j(2^k)`, the Trotter-step total of the cost model.
    pub fn trotter_step_total(&self) -> u64 {
        self.powers.iter().flat_map(|p| p.m.iter()).sum()
    }

    /// `Σ_j Σ_k 2^k·m_j(2^k)`: Strang steps actually executed by the circuits.
    pub fn executed_steps(&self) -> u64 {
        self.powers.iter().map(|p| p.k * p.m.iter().sum::<u64>()).sum()
    }
}

/// `Σ a_j v_j` for scalar estimates.
pub fn combine_scalars<T: Real>(values: &[T], a_vec: &[T]) -> Result<T> {
    if values.len() != a_vec.len() {
        return Err(Error::DimensionMismatch {
            expected: a_vec.len(),
            got: values.len(),
        });
    }
    Ok(values.iter().zip(a_vec).fold(T::zero(), |acc, (&v, &a)| acc + a * v))
}

/// `Σ a_j v⃗_j` for vector estimates.
pub fn combine_vectors<T: Real>(values: &[Vec<Complex<T>>], a_vec: &[T]) -> Result<Vec<Complex<T>>> {
    if values.len() != a_vec.len() {
        return Err(Error::DimensionMismatch {
            expected: a_vec.len(),
            got: values.len(),
        });
    }
    let dim = values.first().map_or(0, Vec::len);
    let mut out = vec![Complex::new(T::zero(), T::zero()); dim];
    for (v, &a) in values.iter().zip(a_vec) {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        for (o, z) in out.iter_mut().zip(v) {
            *o += z * a;
        }
    }
    Ok(out)
}

/// Eigenvalue-estimation cost of the extrapolated and the plain schemes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostModel {
    /// `Σ_j Σ_k G·α_{2^k}·j`.
    pub extrapolated_cost: f64,
    /// `Σ_k G·m(2^k, t, b, ε_A)`.
    pub plain_cost: f64,
    /// `G(n_l l² + 2^{n_l/2l} l)`.
    pub closed_form_bound: f64,
    /// `G·l(l+1)/2·(n_l + Σ_k 2^{k/2l})`, which always dominates `extrapolated_cost`.
    pub summed_bound: f64,
}

/// Costs for `n_l` controlled powers with `G` CNOTs per Strang step.
pub fn qpe_cost_model(n_l: usize, l: usize, g: f64, t: f64, b: f64, eps_a: f64) -> Result<CostModel> {
    let plan = build_plan(l, n_l)?;
    let extrapolated_cost = g * plan.trotter_step_total() as f64;
    let plain_cost = g
        * (0..n_l)
            .map(|s| crate::hamsim::m_choice(1u64 << s, t, b, eps_a) as f64)
            .sum::<f64>();
    let lf = l as f64;
    let geometric: f64 = (0..n_l).map(|k| 2f64.powf(k as f64 / (2.0 * lf))).sum();
    Ok(CostModel {
        extrapolated_cost,
        plain_cost,
        closed_form_bound: g * ((n_l as f64) * lf * lf + 2f64.powf(n_l as f64 / (2.0 * lf)) * lf),
        summed_bound: g * lf * (lf + 1.0) / 2.0 * (n_l as f64 + geometric),
    })
}
