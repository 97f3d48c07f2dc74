//! Tridiagonal symmetric Toeplitz systems: analytic spectrum, classical
//! solver and exact evolution.
//!
//! Eigenvalues are indexed `j ∈ 1..=N` with `λ_j = a − 2b·cos(jπ/(N+1))`.
//! The matching unit eigenvector has components
//! `(−1)^i · √(2/(N+1)) · sin((i+1)jπ/(N+1))` for `i ∈ 0..N`, so the first
//! component is always positive.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::CMatrix;

/// Widest system for which [`TridiagonalToeplitz::exact_evolution`] builds a dense unitary.
pub const MAX_EVOLUTION_QUBITS: usize = 10;

/// `N × N` matrix with `a` on the diagonal and `b` on both off-diagonals, `N = 2^{n_b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalToeplitz<T> {
    pub n_b: usize,
    pub a: T,
    pub b: T,
}

/// Extremes of the spectrum and the condition number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumSummary<T> {
    pub lambda_min: T,
    pub lambda_max: T,
    pub kappa: T,
}

/// Right-hand side: explicit entries, or a polynomial sampled at `x_i = i/(N−1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RhsSpec {
    /// Ascending coefficients: `coeffs[k]` multiplies `x^k`.
    Poly {
        coeffs: Vec<f64>,
    },
    Vector {
        values: Vec<f64>,
    },
}

/// Reference solution of `A x = b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalSolution<T> {
    /// Solution for the unnormalized right-hand side.
    pub x_raw: Vec<T>,
    pub x_normalized: Vec<T>,
    pub norm_x: T,
    pub norm_b: T,
    pub norm_b_inf: T,
    pub kappa: T,
}

impl<T: Real> ClassicalSolution<T> {
    /// `‖x‖/‖b‖`, the norm of the solution for the unit right-hand side.
    pub fn norm_ratio(&self) -> T {
        self.norm_x / self.norm_b
    }
}

/// Problem file: `{n_b, a, b, rhs: {type, coeffs|values}, epsilon}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub n_b: usize,
    pub a: f64,
    pub b: f64,
    pub rhs: RhsSpec,
    pub epsilon: f64,
}

impl Problem {
    pub fn matrix(&self) -> TridiagonalToeplitz<f64> {
        TridiagonalToeplitz::new(self.n_b, self.a, self.b)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Problem = serde_json::from_str(text)?;
        p.rhs.validate(1 << p.n_b)?;
        if p.n_b == 0 {
            return Err(Error::InvalidArgument("n_b must be at least 1".into()));
        }
        Ok(p)
    }
}

/// Horner evaluation of ascending coefficients.
pub fn eval_poly<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Grid point `x_i = i/(N−1)`.
pub fn grid_point<T: Real>(i: usize, n: usize) -> T {
    T::of_usize(i) / T::of_usize(n - 1)
}

impl RhsSpec {
    /// Entries of `b⃗` for dimension `n`.
    pub fn values<T: Real>(&self, n: usize) -> Vec<T> {
        match self {
            RhsSpec::Poly { coeffs } => {
                let c: Vec<T> = coeffs.iter().map(|&v| T::of(v)).collect();
                (0..n).map(|i| eval_poly(&c, grid_point(i, n))).collect()
            }
            RhsSpec::Vector { values } => values.iter().map(|&v| T::of(v)).collect(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let RhsSpec::Vector { values } = self {
            if values.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: values.len(),
                });
            }
        }
        if self.values::<f64>(n).iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument("right-hand side vanishes on the grid".into()));
        }
        Ok(())
    }
}

pub fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt()
}

pub fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

impl<T: Real> TridiagonalToeplitz<T> {
    pub fn new(n_b: usize, a: T, b: T) -> Self {
        assert!(n_b >= 1, "n_b must be at least 1");
        Self { n_b, a, b }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_b
    }

    fn theta(&self, j: usize) -> T {
        T::of_usize(j) * T::PI() / T::of_usize(self.dim() + 1)
    }

    /// `λ_j = a − 2b·cos(jπ/(N+1))` for `j ∈ 1..=N`.
    pub fn eigenvalue(&self, j: usize) -> Result<T> {
        let n = self.dim();
        if j == 0 || j > n {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        Ok(self.a - T::of(2.0) * self.b * self.theta(j).cos())
    }

    /// All eigenvalues in index order `j = 1..=N`.
    pub fn eigenvalues(&self) -> Vec<T> {
        (1..=self.dim())
            .map(|j| self.a - T::of(2.0) * self.b * self.theta(j).cos())
            .collect()
    }

    /// Unit eigenvector paired with [`eigenvalue`](Self::eigenvalue)`(j)`.
    pub fn eigenvector(&self, j: usize) -> Result<Vec<T>> {
        let n = self.dim();
        if j == 0 || j > n {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        let s = (T::of(2.0) / T::of_usize(n + 1)).sqrt();
        let th = self.theta(j);
        Ok((0..n)
            .map(|i| {
                let v = s * (T::of_usize(i + 1) * th).sin();
                if i % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect())
    }

    pub fn spectrum_summary(&self) -> Result<SpectrumSummary<T>> {
        let ev = self.eigenvalues();
        let scale = self.a.abs() + T::of(2.0) * self.b.abs();
        let tiny = T::epsilon() * T::of(64.0) * scale.max(T::one());
        if let Some(idx) = ev.iter().position(|l| l.abs() <= tiny) {
            return Err(Error::SingularSystem { index: idx + 1 });
        }
        let lambda_min = ev.iter().copied().fold(T::infinity(), T::min);
        let lambda_max = ev.iter().copied().fold(T::neg_infinity(), T::max);
        debug_assert!(lambda_max.abs() <= scale * (T::one() + T::epsilon() * T::of(8.0)));
        let kappa = if lambda_min > T::zero() {
            lambda_max / lambda_min
        } else {
            let amax = ev.iter().fold(T::zero(), |m, l| m.max(l.abs()));
            let amin = ev.iter().fold(T::infinity(), |m, l| m.min(l.abs()));
            amax / amin
        };
        Ok(SpectrumSummary {
            lambda_min,
            lambda_max,
            kappa,
        })
    }

    /// `A v`.
    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        let n = v.len();
        (0..n)
            .map(|i| {
                let mut s = self.a * v[i];
                if i > 0 {
                    s += self.b * v[i - 1];
                }
                if i + 1 < n {
                    s += self.b * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Row-major dense real matrix.
    pub fn dense(&self) -> Vec<T> {
        let n = self.dim();
        let mut m = vec![T::zero(); n * n];
        for i in 0..n {
            m[i * n + i] = self.a;
            if i + 1 < n {
                m[i * n + i + 1] = self.b;
                m[(i + 1) * n + i] = self.b;
            }
        }
        m
    }

    /// Thomas-algorithm solve of `A x = rhs`.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        let mut denom = self.a;
        for i in 0..n {
            if i > 0 {
                denom = self.a - self.b * c[i - 1];
            }
            if denom.abs() <= T::epsilon() * (self.a.abs() + self.b.abs()) {
                return Err(Error::SingularSystem { index: i + 1 });
            }
            c[i] = self.b / denom;
            d[i] = if i == 0 {
                rhs[0] / denom
            } else {
                (rhs[i] - self.b * d[i - 1]) / denom
            };
        }
        let mut x = d;
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= c[i] * next;
        }
        Ok(x)
    }

    pub fn solve_classical(&self, rhs: &RhsSpec) -> Result<ClassicalSolution<T>> {
        rhs.validate(self.dim())?;
        self.solve_values(&rhs.values(self.dim()))
    }

    pub fn solve_values(&self, b: &[T]) -> Result<ClassicalSolution<T>> {
        let summary = self.spectrum_summary()?;
        let x_raw = self.solve(b)?;
        let norm_x = norm2(&x_raw);
        Ok(ClassicalSolution {
            x_normalized: x_raw.iter().map(|&v| v / norm_x).collect(),
            x_raw,
            norm_x,
            norm_b: norm2(b),
            norm_b_inf: norm_inf(b),
            kappa: summary.kappa,
        })
    }

    /// `e^{iAt}` from the analytic eigenbasis.
    pub fn exact_evolution(&self, t: T) -> Result<CMatrix<T>> {
        if self.n_b > MAX_EVOLUTION_QUBITS {
            return Err(Error::SizeCap {
                what: "n_b for exact evolution",
                got: self.n_b,
                limit: MAX_EVOLUTION_QUBITS,
            });
        }
        let n = self.dim();
        let vecs: Vec<Vec<T>> = (1..=n).map(|j| self.eigenvector(j)).collect::<Result<_>>()?;
        let phases: Vec<Complex<T>> = self
            .eigenvalues()
            .iter()
            .map(|&l| Complex::from_polar(T::one(), l * t))
            .collect();
        let mut u = CMatrix::zeros(n);
        for r in 0..n {
            for c in r..n {
                let mut acc = Complex::zero();
                for (v, p) in vecs.iter().zip(&phases) {
                    acc += p * (v[r] * v[c]);
                }
                u.set(r, c, acc);
                u.set(c, r, acc);
            }
        }
        Ok(u)
    }
}
