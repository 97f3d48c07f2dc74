//! Product-formula simulation of `e^{iAt}` for tridiagonal Toeplitz `A`.
//!
//! `A = H₁ + H₂ + H₃` with `H₁ = aI`, `H₂` coupling the pairs `(2i, 2i+1)`
//! (a `σ_x` on qubit 0) and `H₃` coupling `(2i−1, 2i)`. Every circuit here
//! acts on `n_b + 1` wires: the system on `0..n_b` and a flag ancilla on
//! wire `n_b` that must start (and ends) in |1⟩.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::sim::{circuit_unitary, CMatrix, Control, GateKind, Instruction, QuantumCircuit};
use crate::toeplitz::TridiagonalToeplitz;

/// How `e^{iH₃t}` is synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum H3Mode {
    /// Flag ancilla, increment, `Rx` on qubit 0, decrement.
    #[default]
    Flag,
    /// One basis-change block per trailing-zero class of the pair index.
    CBlock,
}

/// The three-term splitting of a Toeplitz matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToeplitzDecomposition<T> {
    pub n_b: usize,
    pub a: T,
    pub b: T,
    pub h3_mode: H3Mode,
}

/// Evolution time, Trotter steps and power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrotterParams<T> {
    pub t: T,
    pub m: u64,
    pub k: u64,
}

impl<T: Real> From<&TridiagonalToeplitz<T>> for ToeplitzDecomposition<T> {
    fn from(m: &TridiagonalToeplitz<T>) -> Self {
        Self::new(m.n_b, m.a, m.b)
    }
}

impl<T: Real> ToeplitzDecomposition<T> {
    pub fn new(n_b: usize, a: T, b: T) -> Self {
        assert!(n_b >= 1, "n_b must be at least 1");
        Self {
            n_b,
            a,
            b,
            h3_mode: H3Mode::Flag,
        }
    }

    pub fn with_h3_mode(mut self, mode: H3Mode) -> Self {
        self.h3_mode = mode;
        self
    }

    pub fn width(&self) -> usize {
        self.n_b + 1
    }

    pub fn flag(&self) -> usize {
        self.n_b
    }

    pub fn dim(&self) -> usize {
        1 << self.n_b
    }

    pub fn matrix(&self) -> TridiagonalToeplitz<T> {
        TridiagonalToeplitz::new(self.n_b, self.a, self.b)
    }

    /// `e^{iat}` as a global phase; controlling it yields `U1(at)` on the control.
    pub fn exp_h1(&self, t: T) -> Result<QuantumCircuit<T>> {
        let mut c = QuantumCircuit::new(self.width());
        c.gate(crate::sim::Gate::new(GateKind::GlobalPhase(self.a * t), 0))?;
        Ok(c)
    }

    /// `Rx(−2bt)` on qubit 0.
    pub fn exp_h2(&self, t: T) -> Result<QuantumCircuit<T>> {
        let mut c = QuantumCircuit::new(self.width());
        c.rx(-T::of(2.0) * self.b * t, 0)?;
        Ok(c)
    }

    pub fn exp_h3(&self, t: T) -> Result<QuantumCircuit<T>> {
        match self.h3_mode {
            H3Mode::Flag => self.exp_h3_flag(t),
            H3Mode::CBlock => self.exp_h3_cblock(t),
        }
    }

    /// `+1 mod 2^{n_b}` on the system as a multi-controlled-X ripple.
    pub fn increment(&self) -> Result<QuantumCircuit<T>> {
        let mut c = QuantumCircuit::new(self.width());
        for k in (1..self.n_b).rev() {
            c.mc(GateKind::X, k, (0..k).map(Control::pos).collect())?;
        }
        c.x(0)?;
        Ok(c)
    }

    pub fn exp_h3_flag(&self, t: T) -> Result<QuantumCircuit<T>> {
        let n = self.n_b;
        let mut c = QuantumCircuit::new(self.width());
        if n < 2 {
            return Ok(c);
        }
        let flag = self.flag();
        let mut mark = QuantumCircuit::new(self.width());
        mark.mc(GateKind::X, flag, (0..n).map(Control::pos).collect())?;
        mark.mc(GateKind::X, flag, (0..n).map(Control::neg).collect())?;
        let on_flag = [Control::pos(flag)];
        let inc = self.increment()?.controlled(&on_flag)?;
        c.append(&mark)?;
        c.append(&inc)?;
        c.mc(GateKind::Rx(-T::of(2.0) * self.b * t), 0, on_flag.to_vec())?;
        c.append(&inc.inverse())?;
        c.append(&mark)?;
        Ok(c)
    }

    pub fn exp_h3_cblock(&self, t: T) -> Result<QuantumCircuit<T>> {
        let mut c = QuantumCircuit::new(self.width());
        for j in 1..self.n_b {
            let mut basis = QuantumCircuit::new(self.width());
            basis.cx(0, j)?;
            for q in 1..j {
                basis.mc(GateKind::X, q, vec![Control::neg(0)])?;
            }
            c.append(&basis)?;
            c.mc(
                GateKind::Rx(-T::of(2.0) * self.b * t),
                0,
                (1..=j).map(Control::pos).collect(),
            )?;
            c.append(&basis.inverse())?;
        }
        Ok(c)
    }

    /// One symmetric step `e^{iH₂τ/2} e^{iH₃τ} e^{iH₂τ/2}` (no `H₁`).
    pub fn strang_step(&self, tau: T) -> Result<QuantumCircuit<T>> {
        let half = self.exp_h2(tau * T::of(0.5))?;
        let mut c = QuantumCircuit::new(self.width());
        c.append_labeled("exp_h2", &half)?;
        c.append_labeled("exp_h3", &self.exp_h3(tau)?)?;
        c.append_labeled("exp_h2", &half)?;
        Ok(c)
    }

    /// `e^{iH₁t}` followed by `m` merged Strang steps of size `t/m`; `exp_h2`
    /// occurs `m + 2` times.
    pub fn strang_circuit(&self, t: T, m: u64) -> Result<QuantumCircuit<T>> {
        if m == 0 {
            return Err(Error::InvalidArgument("Trotter steps m must be at least 1".into()));
        }
        let tau = t / T::of(m as f64);
        let mut c = QuantumCircuit::new(self.width());
        c.append_labeled("exp_h1", &self.exp_h1(t)?)?;
        c.append_labeled("exp_h2", &self.exp_h2(tau * T::of(0.5))?)?;
        let h3 = self.exp_h3(tau)?;
        let h2 = self.exp_h2(tau)?;
        for _ in 0..m {
            c.append_labeled("exp_h3", &h3)?;
            c.append_labeled("exp_h2", &h2)?;
        }
        c.append_labeled("exp_h2", &self.exp_h2(-tau * T::of(0.5))?)?;
        Ok(c)
    }

    /// `V(t, m)^k`: `e^{iakt}` and `k·m` Strang steps of size `t/m`, as one
    /// repeated block.
    pub fn evolution_power(&self, t: T, m: u64, k: u64) -> Result<QuantumCircuit<T>> {
        if m == 0 || k == 0 {
            return Err(Error::InvalidArgument("m and k must be at least 1".into()));
        }
        let mut c = self.exp_h1(t * T::of(k as f64))?;
        let step = self.strang_step(t / T::of(m as f64))?;
        c.push(Instruction::Repeat {
            body: Box::new(step),
            wires: (0..self.width()).collect(),
            controls: Vec::new(),
            reps: k * m,
        })?;
        Ok(c)
    }

    /// Dense `H₂` (system only).
    pub fn h2_dense(&self) -> CMatrix<T> {
        let n = self.dim();
        CMatrix::from_real_fn(n, |r, c| if r / 2 == c / 2 && r != c { self.b } else { T::zero() })
    }

    /// Dense `H₃` (system only).
    pub fn h3_dense(&self) -> CMatrix<T> {
        let n = self.dim();
        CMatrix::from_real_fn(n, |r, c| {
            let (lo, hi) = (r.min(c), r.max(c));
            if hi == lo + 1 && lo % 2 == 1 {
                self.b
            } else {
                T::zero()
            }
        })
    }

    pub fn h1_dense(&self) -> CMatrix<T> {
        CMatrix::from_real_fn(self.dim(), |r, c| if r == c { self.a } else { T::zero() })
    }
}

/// Block of a `(n_b + 1)`-wire unitary acting on the system with the flag in |1⟩.
pub fn system_block<T: Real>(u: &CMatrix<T>, n_b: usize) -> CMatrix<T> {
    let idx: Vec<usize> = (0..1usize << n_b).map(|i| i | (1 << n_b)).collect();
    u.submatrix(&idx)
}

/// System unitary of a ham-sim circuit.
pub fn system_unitary<T: Real>(c: &QuantumCircuit<T>, n_b: usize) -> Result<CMatrix<T>> {
    Ok(system_block(&circuit_unitary(c)?, n_b))
}

/// `⌈√(k t³ |b|³ / (2 ε_A))⌉`, at least 1.
pub fn m_choice(k: u64, t: f64, b: f64, eps_a: f64) -> u64 {
    assert!(eps_a > 0.0, "eps_A must be positive");
    let m = ((k as f64) * t.powi(3) * b.abs().powi(3) / (2.0 * eps_a)).sqrt().ceil();
    (m as u64).max(1)
}

/// Leading-order Strang error `k t³ |b|³ / (2 m²)`.
pub fn trotter_lemma_bound(t: f64, m: u64, k: u64, b: f64) -> f64 {
    (k as f64) * t.powi(3) * b.abs().powi(3) / (2.0 * (m as f64).powi(2))
}

/// Dense `e^{iAt}` from the `nalgebra` eigensolver.
pub fn reference_evolution(d: &ToeplitzDecomposition<f64>, t: f64) -> CMatrix<f64> {
    let a = d.matrix();
    linalg::expm_i_hermitian(&linalg::real_to_complex(&a.dense(), a.dim()), t)
}

/// Measured `‖(e^{iAt})^k − V(t, m)^k‖₂`.
pub fn trotter_error(d: &ToeplitzDecomposition<f64>, t: f64, m: u64, k: u64) -> Result<f64> {
    let v = system_unitary(&d.strang_circuit(t, m)?, d.n_b)?;
    let exact = reference_evolution(d, t * k as f64);
    Ok(linalg::spectral_norm(&exact.sub(&v.pow(k))))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `d`-dimensional Poisson evolution as independent per-dimension blocks.
///
/// Each dimension uses the scaled Toeplitz matrix `A_h/h²` with `h = 1/(N+1)`,
/// i.e. `a = 2(N+1)²`, `b = −(N+1)²`. Dimension `k` occupies wires
/// `k(n_b+1)..(k+1)(n_b+1)` with its own flag on the last of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonEvolution<T> {
    pub dims: Vec<ToeplitzDecomposition<T>>,
}

pub fn poisson_dd<T: Real>(n_b: usize, d_dims: usize) -> Result<PoissonEvolution<T>> {
    if d_dims == 0 {
        return Err(Error::InvalidArgument("d_dims must be at least 1".into()));
    }
    let inv_h2 = T::of_usize(((1usize << n_b) + 1).pow(2));
    let one = ToeplitzDecomposition::new(n_b, T::of(2.0) * inv_h2, -inv_h2);
    Ok(PoissonEvolution {
        dims: vec![one; d_dims],
    })
}

impl<T: Real> PoissonEvolution<T> {
    pub fn width(&self) -> usize {
        self.dims.iter().map(|d| d.width()).sum()
    }

    fn wires(&self, k: usize) -> Vec<usize> {
        let start: usize = self.dims[..k].iter().map(|d| d.width()).sum();
        (start..start + self.dims[k].width()).collect()
    }

    /// Parallel per-dimension Strang circuits.
    pub fn circuit(&self, t: T, m: u64) -> Result<QuantumCircuit<T>> {
        let mut c = QuantumCircuit::new(self.width());
        for (k, d) in self.dims.iter().enumerate() {
            c.append_on(&d.strang_circuit(t, m)?, &self.wires(k))?;
        }
        Ok(c)
    }

    /// Parallel per-dimension exact evolutions as dense oracles.
    pub fn exact_circuit(&self, t: T) -> Result<QuantumCircuit<T>> {
        let mut c = QuantumCircuit::new(self.width());
        for (k, d) in self.dims.iter().enumerate() {
            let wires = self.wires(k);
            c.push(Instruction::Oracle {
                matrix: d.matrix().exact_evolution(t)?,
                wires: wires[..d.n_b].to_vec(),
                controls: Vec::new(),
                label: format!("exp_iAt_dim{k}"),
            })?;
        }
        Ok(c)
    }

    /// Indices of the full register with every flag in |1⟩, in system order
    /// (dimension 0 least significant).
    pub fn system_indices(&self) -> Vec<usize> {
        let n_sys: usize = self.dims.iter().map(|d| d.n_b).sum();
        (0..1usize << n_sys)
            .map(|s| {
                let mut idx = 0usize;
                let mut shift_sys = 0;
                for (k, d) in self.dims.iter().enumerate() {
                    let part = (s >> shift_sys) & ((1 << d.n_b) - 1);
                    let w = self.wires(k);
                    idx |= part << w[0];
                    idx |= 1 << w[d.n_b];
                    shift_sys += d.n_b;
                }
                idx
            })
            .collect()
    }
}
