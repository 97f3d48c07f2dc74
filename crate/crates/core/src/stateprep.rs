//! Polynomial state preparation through multilinear expansion and
//! multi-controlled `Ry` rotations on one ancilla.
//!
//! With the system in uniform superposition, branch `i` drives the ancilla
//! to `cos(c·p(x_i))|0⟩ + sin(c·p(x_i))|1⟩`. Post-selecting the ancilla on
//! |1⟩ leaves a state proportional to `sin(c·p(x_i))`, which approximates
//! `b⃗` for small `c`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::chebyshev::ChebSeries;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::{Control, GateKind, QuantumCircuit};
use crate::toeplitz::{grid_point, norm_inf, ClassicalSolution};

/// Polynomial over qubit bits with `q² = q`. Keys are qubit bitmasks.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearExpansion<T> {
    pub n: usize,
    pub terms: BTreeMap<u64, T>,
}

impl<T: Real> MultilinearExpansion<T> {
    /// Value on the bit pattern of `i`.
    pub fn evaluate(&self, i: u64) -> T {
        self.terms
            .iter()
            .filter(|(&s, _)| s & i == s)
            .fold(T::zero(), |acc, (_, &c)| acc + c)
    }

    /// Nonempty subsets with a nonzero coefficient.
    pub fn nonempty_terms(&self) -> usize {
        self.terms.iter().filter(|(&s, c)| s != 0 && !c.is_zero()).count()
    }
}

/// Expansion of `p(Σ_k w_k q_k)` for arbitrary bit weights `w_k`.
pub fn expand_multilinear_weighted<T: Real>(poly: &[T], weights: &[T]) -> MultilinearExpansion<T> {
    let mut terms: BTreeMap<u64, T> = BTreeMap::new();
    // power holds x^d in reduced form.
    let mut power: BTreeMap<u64, T> = BTreeMap::from([(0, T::one())]);
    for (d, &coef) in poly.iter().enumerate() {
        if d > 0 {
            let mut next: BTreeMap<u64, T> = BTreeMap::new();
            for (&s, &c) in &power {
                for (k, &w) in weights.iter().enumerate() {
                    *next.entry(s | (1 << k)).or_insert_with(T::zero) += c * w;
                }
            }
            power = next;
        }
        if !coef.is_zero() {
            for (&s, &c) in &power {
                *terms.entry(s).or_insert_with(T::zero) += coef * c;
            }
        }
    }
    terms.retain(|_, c| !c.is_zero());
    MultilinearExpansion {
        n: weights.len(),
        terms,
    }
}

/// Expansion on the grid `x = i/(2^n − 1)`, i.e. `x = Σ_k q_k 2^k/(2^n − 1)`.
pub fn expand_multilinear<T: Real>(poly: &[T], n: usize) -> MultilinearExpansion<T> {
    let denom = T::of_usize((1usize << n) - 1);
    let weights: Vec<T> = (0..n).map(|k| T::of_usize(1 << k) / denom).collect();
    expand_multilinear_weighted(poly, &weights)
}

/// Loader parameters. `poly` approximates `f/‖b⃗‖_∞` on `[0, 1]` with grid
/// sup-error `eps_p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoaderConfig<T> {
    pub poly: Vec<T>,
    pub c: T,
    pub n_b: usize,
    pub eps_p: T,
}

impl<T: Real> LoaderConfig<T> {
    pub fn new(poly: Vec<T>, c: T, n_b: usize) -> Result<Self> {
        let cfg = Self {
            poly,
            c,
            n_b,
            eps_p: T::zero(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_eps_p(mut self, eps_p: T) -> Self {
        self.eps_p = eps_p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > T::zero() && self.c <= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "rescaling constant c = {} not in (0, 1]",
                self.c
            )));
        }
        if self.n_b == 0 {
            return Err(Error::InvalidArgument("n_b must be at least 1".into()));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.poly.len().saturating_sub(1)
    }

    /// Whether `d ≤ ⌈n_b/2⌉`, the regime of the closed-form gate bound.
    pub fn gate_bound_applies(&self) -> bool {
        self.degree() <= self.n_b.div_ceil(2)
    }

    /// `Σ_{k=1}^{d} C(n_b, k)(16k − 12)`.
    pub fn cnot_bound(&self) -> u64 {
        (1..=self.degree().min(self.n_b))
            .map(|k| binomial(self.n_b, k) * (16 * k as u64 - 12))
            .sum()
    }

    /// Loader amplitude `sin(c·p(x_i))` of branch `i` on |1⟩.
    pub fn target_amplitude(&self, i: usize) -> T {
        let x = grid_point::<T>(i, 1 << self.n_b);
        (self.c * crate::toeplitz::eval_poly(&self.poly, x)).sin()
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// Circuit on `n_b + 1` qubits; the ancilla is qubit `n_b`.
pub fn build_loader<T: Real>(config: &LoaderConfig<T>) -> Result<QuantumCircuit<T>> {
    config.validate()?;
    let n = config.n_b;
    let exp = expand_multilinear(&config.poly, n);
    let mut circ = QuantumCircuit::new(n + 1);
    for q in 0..n {
        circ.h(q)?;
    }
    let two_c = T::of(2.0) * config.c;
    for (&subset, &coef) in &exp.terms {
        let controls: Vec<Control> = (0..n).filter(|k| subset >> k & 1 == 1).map(Control::pos).collect();
        circ.mc(GateKind::Ry(two_c * coef), n, controls)?;
    }
    Ok(circ)
}

/// Exact loader: branch `i` gets ancilla amplitude `values[i]/‖values‖_∞`
/// through one fully controlled `Ry` per basis state. Equivalent to `c = 1`
/// with an exact `arcsin` encoding.
pub fn build_exact_loader<T: Real>(values: &[T]) -> Result<QuantumCircuit<T>> {
    let dim = values.len();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("{dim} values is not 2^n with n >= 1")));
    }
    let n = dim.trailing_zeros() as usize;
    let inf = norm_inf(values);
    if inf.is_zero() {
        return Err(Error::InvalidArgument("right-hand side vanishes".into()));
    }
    let mut circ = QuantumCircuit::new(n + 1);
    for q in 0..n {
        circ.h(q)?;
    }
    for (i, &v) in values.iter().enumerate() {
        let ratio = (v / inf).max(-T::one()).min(T::one());
        if ratio.is_zero() {
            continue;
        }
        let controls = (0..n)
            .map(|k| Control {
                qubit: k,
                positive: i >> k & 1 == 1,
            })
            .collect();
        circ.mc(GateKind::Ry(T::of(2.0) * ratio.asin()), n, controls)?;
    }
    Ok(circ)
}

/// Lower bound `c²‖b⃗‖²/(N‖b⃗‖_∞²) − c²ε_p` on the ancilla success probability.
pub fn success_probability_bound<T: Real>(config: &LoaderConfig<T>, norm_b: T, norm_b_inf: T, eps_p: T) -> T {
    let c2 = config.c * config.c;
    let n = T::of_usize(1 << config.n_b);
    c2 * norm_b * norm_b / (n * norm_b_inf * norm_b_inf) - c2 * eps_p
}

/// Bound `4κ√N‖b⃗‖_∞(ε_p + c²)/‖b⃗‖` on the solution error caused by approximate loading.
pub fn state_prep_error<T: Real>(config: &LoaderConfig<T>, classical: &ClassicalSolution<T>) -> T {
    let n = T::of_usize(1 << config.n_b);
    T::of(4.0) * classical.kappa * n.sqrt() * classical.norm_b_inf * (config.eps_p + config.c * config.c)
        / classical.norm_b
}

/// Expected repetitions of the loader: `1/P` plainly and `⌈1/√P⌉` with amplitude amplification.
pub fn expected_repetitions<T: Real>(p: T) -> (T, T) {
    (T::one() / p, (T::one() / p.sqrt()).ceil())
}

/// Result of [`fit_polynomial`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyFit<T> {
    /// Ascending monomial coefficients of `p_f ≈ f/‖b⃗‖_∞`.
    pub coeffs: Vec<T>,
    /// Sup over the grid of `|p_f(x_i) − f(x_i)/‖b⃗‖_∞|`.
    pub eps_p: T,
    /// `max_i |f(x_i)|`.
    pub norm_b_inf: T,
}

/// Chebyshev interpolation of `f/‖b⃗‖_∞` on `[0, 1]` at `d + 1` nodes, with
/// the error measured on the `2^{n_b}`-point grid.
pub fn fit_polynomial<T: Real>(f: impl Fn(T) -> T, d: usize, n_b: usize) -> Result<PolyFit<T>> {
    let n = 1usize << n_b;
    let grid: Vec<T> = (0..n).map(|i| f(grid_point(i, n))).collect();
    let inf = norm_inf(&grid);
    if inf.is_zero() {
        return Err(Error::InvalidArgument("function vanishes on the grid".into()));
    }
    let series = ChebSeries::interpolate(T::zero(), T::one(), d, |x| f(x) / inf);
    let coeffs = series.to_monomial();
    let eps_p = grid.iter().enumerate().fold(T::zero(), |m, (i, &v)| {
        let p = crate::toeplitz::eval_poly(&coeffs, grid_point(i, n));
        m.max((p - v / inf).abs())
    });
    Ok(PolyFit {
        coeffs,
        eps_p,
        norm_b_inf: inf,
    })
}
