//! Phase estimation of `U = e^{iAt}` with a swap-free Fourier transform.
//!
//! The closing swap layer of the textbook QFT is folded into the controlled
//! powers: register qubit `j` controls `U^{2^{n_l−1−j}}`, and after the
//! swap-free inverse transform qubit `j` holds bit `j` of the estimate
//! `y ≈ N_l λ t / 2π`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamsim::ToeplitzDecomposition;
use crate::scalar::Real;
use crate::sim::{Control, GateKind, Instruction, QuantumCircuit, StateVector};

/// Source of the controlled powers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EvolutionSource {
    /// Dense `e^{iAkt}` from the analytic eigenbasis.
    Exact,
    /// `V^k(t, m_k)`; `m_per_power[s]` is the step count for power `2^s`.
    Strang { m_per_power: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QpeConfig<T> {
    pub n_l: usize,
    pub t: T,
    pub evolution: EvolutionSource,
}

/// Wire assignment inside a wider circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QpeLayout {
    pub width: usize,
    pub system: Vec<usize>,
    /// Ham-sim flag ancilla; must hold |1⟩.
    pub flag: usize,
    /// `register[j]` is bit `j` of the estimate.
    pub register: Vec<usize>,
}

impl QpeLayout {
    /// System on `0..n_b`, flag on `n_b`, register on `n_b+1..n_b+1+n_l`.
    pub fn compact(n_b: usize, n_l: usize) -> Self {
        Self {
            width: n_b + 1 + n_l,
            system: (0..n_b).collect(),
            flag: n_b,
            register: (n_b + 1..n_b + 1 + n_l).collect(),
        }
    }
}

/// `t = 2π(2^{n_l} − 1)/(2^{n_l} λ_max)`, mapping `λ_max` to `y = N_l − 1`.
pub fn default_time<T: Real>(n_l: usize, lambda_max: T) -> T {
    let nl = T::of(2f64.powi(n_l as i32));
    T::TAU() * (nl - T::one()) / (nl * lambda_max)
}

/// Swap-free QFT on `n` qubits. Its unitary is `R·F` with `F` the DFT and
/// `R` the bit-reversal permutation.
pub fn qft_circuit<T: Real>(n: usize) -> Result<QuantumCircuit<T>> {
    let mut c = QuantumCircuit::new(n);
    for j in (0..n).rev() {
        c.h(j)?;
        for k in (0..j).rev() {
            let lambda = T::PI() / T::of(2f64.powi((j - k) as i32));
            c.mc(GateKind::U1(lambda), j, vec![Control::pos(k)])?;
        }
    }
    Ok(c)
}

/// Inverse of [`qft_circuit`]: `F†·R`.
pub fn inverse_qft_circuit<T: Real>(n: usize) -> Result<QuantumCircuit<T>> {
    Ok(qft_circuit(n)?.inverse())
}

/// Full phase-estimation circuit on `layout.width` wires.
pub fn build_qpe<T: Real>(
    config: &QpeConfig<T>,
    decomp: &ToeplitzDecomposition<T>,
    layout: &QpeLayout,
) -> Result<QuantumCircuit<T>> {
    let n_l = config.n_l;
    if layout.register.len() != n_l || layout.system.len() != decomp.n_b {
        return Err(Error::DimensionMismatch {
            expected: n_l,
            got: layout.register.len(),
        });
    }
    if let EvolutionSource::Strang { m_per_power } = &config.evolution {
        if m_per_power.len() != n_l {
            return Err(Error::DimensionMismatch {
                expected: n_l,
                got: m_per_power.len(),
            });
        }
    }
    let mut c = QuantumCircuit::new(layout.width);
    for &q in &layout.register {
        c.h(q)?;
    }
    let mut ham_wires = layout.system.clone();
    ham_wires.push(layout.flag);
    let matrix = decomp.matrix();
    for (j, &ctrl) in layout.register.iter().enumerate() {
        let s = n_l - 1 - j;
        let k = 1u64 << s;
        let on = [Control::pos(ctrl)];
        match &config.evolution {
            EvolutionSource::Exact => {
                c.push(Instruction::Oracle {
                    matrix: matrix.exact_evolution(config.t * T::of(k as f64))?,
                    wires: layout.system.clone(),
                    controls: on.to_vec(),
                    label: format!("exp_iAt^{k}"),
                })?;
            }
            EvolutionSource::Strang { m_per_power } => {
                let power = decomp.evolution_power(config.t, m_per_power[s], k)?;
                let wide = power.embed(layout.width, &ham_wires)?;
                c.append(&wide.controlled(&on)?)?;
            }
        }
    }
    let iqft = inverse_qft_circuit::<T>(n_l)?;
    c.append_on(&iqft, &layout.register)?;
    Ok(c)
}

/// One bin of the eigenvalue register.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub register_value: u64,
    /// `2π y/(N_l t)`.
    pub lambda_tilde: f64,
    pub probability: f64,
}

/// Marginal distribution of the register, with each value mapped to its eigenvalue estimate.
pub fn eigenvalue_histogram<T: Real>(
    state: &StateVector<T>,
    config: &QpeConfig<T>,
    layout: &QpeLayout,
) -> Vec<HistogramBin> {
    let nl = (1u64 << config.n_l) as f64;
    let t = config.t.to_f64_lossy();
    state
        .marginal(&layout.register)
        .into_iter()
        .enumerate()
        .map(|(y, p)| HistogramBin {
            register_value: y as u64,
            lambda_tilde: std::f64::consts::TAU * y as f64 / (nl * t),
            probability: p.to_f64_lossy(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::circuit_unitary;

    #[test]
    fn one_qubit_qft_is_hadamard() {
        let u = circuit_unitary(&qft_circuit::<f64>(1).unwrap()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((u.get(0, 0).re - s).abs() < 1e-15);
        assert!((u.get(1, 1).re + s).abs() < 1e-15);
    }

    #[test]
    fn default_time_maps_max_to_top() {
        let t = default_time(4, 1.5f64);
        assert!((16.0 * 1.5 * t / std::f64::consts::TAU - 15.0).abs() < 1e-12);
    }
}
