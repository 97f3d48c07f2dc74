//! Eigenvalue inversion: piecewise-Chebyshev approximation of `arcsin(C/x)`
//! on intervals `[a_i, 5a_i]`, parameter derivation and the conditioned
//! rotation on the inversion ancilla.

use serde::Serialize;

use crate::chebyshev::ChebSeries;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::{Control, GateKind, QuantumCircuit};

/// Points per interval used to measure the sup-error.
pub const GRID_POINTS: usize = 1000;

/// `arcsin(min(1, C/x))`. The clamp only bites when `x < C`.
pub fn inversion_target<T: Real>(c: T, x: T) -> T {
    let r = c / x;
    if r > T::one() {
        log::trace!("clamping arcsin argument {r} to 1");
        T::FRAC_PI_2()
    } else {
        r.asin()
    }
}

/// Interpolant of a single interval.
pub fn chebyshev_fit<T: Real>(lo: T, hi: T, d: usize, c: T) -> ChebSeries<T> {
    ChebSeries::interpolate(lo, hi, d, |x| inversion_target(c, x))
}

/// Degree-`d` interpolants of `arcsin(C/x)` on `[a_i, 5a_i]` covering `[a_start, N_l − 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseChebyshev<T> {
    pub a_start: T,
    /// Left end of the first fitted interval; angles below it are `π/2`.
    pub fit_start: T,
    pub c: T,
    pub d: usize,
    pub n_l: usize,
    pub intervals: Vec<ChebSeries<T>>,
}

impl<T: Real> PiecewiseChebyshev<T> {
    pub fn fit(a_start: T, c: T, d: usize, n_l: usize) -> Result<Self> {
        Self::fit_from(a_start, a_start, c, d, n_l)
    }

    /// Intervals start at `max(a_start, C)`. Below `C` the clamped target is
    /// exactly `π/2`, so the fitted pieces never contain the kink at `x = C`.
    pub fn fit_clamped(a_start: T, c: T, d: usize, n_l: usize) -> Result<Self> {
        Self::fit_from(a_start, a_start.max(c), c, d, n_l)
    }

    fn fit_from(a_start: T, fit_start: T, c: T, d: usize, n_l: usize) -> Result<Self> {
        if a_start.is_nan() || a_start <= T::zero() {
            return Err(Error::InvalidArgument(format!("a_start = {a_start} must be positive")));
        }
        let top = T::of((1u64 << n_l) as f64 - 1.0);
        let mut intervals = Vec::new();
        let mut lo = fit_start;
        while lo < top {
            let hi = lo * T::of(5.0);
            intervals.push(chebyshev_fit(lo, hi, d, c));
            lo = hi;
        }
        Ok(Self {
            a_start,
            fit_start,
            c,
            d,
            n_l,
            intervals,
        })
    }

    /// Number of intervals, `⌈log₅((N_l − 1)/fit_start)⌉`.
    pub fn m(&self) -> usize {
        self.intervals.len()
    }

    /// Interpolated angle; `x` below `a_start` uses the first interval.
    pub fn eval(&self, x: T) -> T {
        let seg = self
            .intervals
            .iter()
            .find(|s| x <= s.hi)
            .or(self.intervals.last())
            .expect("at least one interval");
        seg.eval(x)
    }

    /// Rotation angle `θ_v` for register value `v`: none for `v = 0`,
    /// `π/2` below `fit_start`, the interpolant above.
    pub fn angle(&self, v: u64) -> Option<T> {
        if v == 0 {
            return None;
        }
        let x = T::of(v as f64);
        if x < self.fit_start || self.intervals.is_empty() {
            Some(T::FRAC_PI_2())
        } else {
            Some(self.eval(x))
        }
    }

    /// Sup-error of each interval on a uniform grid.
    pub fn interval_errors(&self) -> Vec<T> {
        self.intervals
            .iter()
            .map(|s| {
                (0..GRID_POINTS).fold(T::zero(), |m, i| {
                    let x = s.lo + (s.hi - s.lo) * T::of_usize(i) / T::of_usize(GRID_POINTS - 1);
                    m.max((s.eval(x) - inversion_target(self.c, x)).abs())
                })
            })
            .collect()
    }

    pub fn sup_error(&self) -> T {
        self.interval_errors().into_iter().fold(T::zero(), T::max)
    }

    /// Largest angle error over the integer register values `v ≥ fit_start`.
    pub fn register_error(&self) -> T {
        let first = self.fit_start.ceil().to_f64_lossy().max(1.0) as u64;
        (first..1u64 << self.n_l).fold(T::zero(), |m, v| {
            let x = T::of(v as f64);
            m.max((self.eval(x) - inversion_target(self.c, x)).abs())
        })
    }

    /// Whether the clamped target has its kink `x = C` inside the fitted region.
    pub fn has_kink(&self) -> bool {
        self.c > self.fit_start
    }

    /// Toffoli-count model `n_l²·d + M·d·log₂M` of an in-circuit Horner evaluation.
    pub fn horner_toffoli_model(&self) -> f64 {
        let m = self.m() as f64;
        let d = self.d as f64;
        (self.n_l * self.n_l) as f64 * d + if m > 1.0 { m * d * m.log2() } else { 0.0 }
    }
}

/// `|arcsin(x)|` continued to `|x| > 1`: `√(ln²r + (π/2)²)` with `r = |x| + √(x² − 1)`.
pub fn arcsin_magnitude<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax <= T::one() {
        return ax.asin();
    }
    let r = ax + (ax * ax - T::one()).sqrt();
    (r.ln().powi(2) + T::FRAC_PI_2().powi(2)).sqrt()
}

/// `√(ln²r + (π/2)²)` with `r = 2C/a + √|1 − (2C/a)²|`.
fn lemma_magnitude<T: Real>(a_start: T, c: T) -> T {
    let q = T::of(2.0) * c / a_start;
    let r = q + (T::one() - q * q).abs().sqrt();
    (r.ln().powi(2) + T::FRAC_PI_2().powi(2)).sqrt()
}

/// `8.13·√(ln²r + (π/2)²)/(2^{d+1} − 1)`.
pub fn lemma8_bound<T: Real>(a_start: T, c: T, d: usize) -> T {
    T::of(8.13) * lemma_magnitude(a_start, c) / (T::of(2f64.powi(d as i32 + 1)) - T::one())
}

/// Lemma-9 register width `3(⌊log₂(2(2κ² − ε_R)/ε_R + 1)⌋ + 1)`.
pub fn lemma_n_l(kappa: f64, eps_r: f64) -> usize {
    let inner = 2.0 * (2.0 * kappa * kappa - eps_r) / eps_r + 1.0;
    3 * (inner.log2().floor() as usize + 1)
}

/// Inversion parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionParams {
    pub n_l: usize,
    /// Width demanded by the error analysis, before any cap.
    pub lemma_n_l: usize,
    pub eps_r: f64,
    pub eps_c: f64,
    /// Rotation constant in register units, `N_l t λ_min/2π`.
    pub c_prime: f64,
    /// Rotation constant in eigenvalue units, `λ_min`.
    pub c: f64,
    pub a_start: f64,
    pub d: usize,
    pub kappa: f64,
}

/// Parameters with the register width the error analysis asks for.
pub fn derive_params(kappa: f64, eps_r: f64, t: f64, lambda_min: f64) -> Result<InversionParams> {
    validate(kappa, eps_r)?;
    derive_params_with_n_l(kappa, eps_r, t, lambda_min, lemma_n_l(kappa, eps_r))
}

fn validate(kappa: f64, eps_r: f64) -> Result<()> {
    if !(eps_r > 0.0 && eps_r < 1.0) {
        return Err(Error::InvalidArgument(format!("eps_R = {eps_r} not in (0, 1)")));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!("kappa = {kappa} below 1")));
    }
    Ok(())
}

/// Parameters evaluated at a given register width.
pub fn derive_params_with_n_l(kappa: f64, eps_r: f64, t: f64, lambda_min: f64, n_l: usize) -> Result<InversionParams> {
    validate(kappa, eps_r)?;
    let n_lf = 2f64.powi(n_l as i32);
    let a_start = 2f64.powf(2.0 * n_l as f64 / 3.0);
    let c_prime = n_lf * t * lambda_min / std::f64::consts::TAU;
    let s = lemma_magnitude(a_start, c_prime);
    let d = (1.0 + 16.23 * s * kappa * (2.0 * kappa - eps_r) / eps_r).log2().floor() as usize;
    Ok(InversionParams {
        n_l,
        lemma_n_l: lemma_n_l(kappa, eps_r),
        eps_r,
        eps_c: eps_r / (2.0 * (2.0 * kappa * kappa - eps_r)),
        c_prime,
        c: lambda_min,
        a_start,
        d,
        kappa,
    })
}

/// `((1 − ε_R)/κ)²`.
pub fn success_probability(kappa: f64, eps_r: f64) -> f64 {
    ((1.0 - eps_r) / kappa).powi(2)
}

/// Rotation angle for every register value `v ∈ 0..N_l`; `None` leaves the ancilla untouched.
pub fn fitted_angles<T: Real>(pc: &PiecewiseChebyshev<T>) -> Vec<Option<T>> {
    (0..1u64 << pc.n_l).map(|v| pc.angle(v)).collect()
}

/// Exact `arcsin(min(1, C/v))` for every `v ≥ 1`, with no identity region.
pub fn exact_angles<T: Real>(c: T, n_l: usize) -> Vec<Option<T>> {
    (0..1u64 << n_l)
        .map(|v| (v > 0).then(|| inversion_target(c, T::of(v as f64))))
        .collect()
}

/// `Ry(2θ_v)` on `ancilla` conditioned on `register = v`, one gate per value.
pub fn rotation_circuit<T: Real>(
    angles: &[Option<T>],
    register: &[usize],
    ancilla: usize,
    width: usize,
) -> Result<QuantumCircuit<T>> {
    if angles.len() != 1 << register.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 << register.len(),
            got: angles.len(),
        });
    }
    let mut c = QuantumCircuit::new(width);
    for (v, theta) in angles.iter().enumerate() {
        let Some(theta) = theta else { continue };
        let controls = register
            .iter()
            .enumerate()
            .map(|(b, &q)| Control {
                qubit: q,
                positive: v >> b & 1 == 1,
            })
            .collect();
        c.mc(GateKind::Ry(T::of(2.0) * *theta), ancilla, controls)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_l_formula() {
        assert_eq!(lemma_n_l(1.0, 0.5), 9);
    }

    #[test]
    fn arcsin_magnitude_at_two() {
        let v = arcsin_magnitude(2.0f64);
        assert!((v - ((2.0 + 3f64.sqrt()).ln().hypot(std::f64::consts::FRAC_PI_2))).abs() < 1e-15);
        assert!((v - 2.0498).abs() < 1e-4);
    }

    #[test]
    fn intervals_cover_register() {
        let pc = PiecewiseChebyshev::fit(16.0f64, 4.0, 5, 6).unwrap();
        assert_eq!(pc.m(), 1);
        let pc = PiecewiseChebyshev::fit(3.0f64, 1.0, 5, 8).unwrap();
        assert_eq!(pc.m(), 3);
        assert!(pc.intervals.last().unwrap().hi >= 255.0);
        for w in pc.intervals.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
    }
}
