use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Single-qubit gate kinds. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind<T> {
    X,
    H,
    /// `exp(-i θ Y / 2)`.
    Ry(T),
    /// `exp(-i θ X / 2)`.
    Rx(T),
    /// `diag(1, e^{iλ})`.
    U1(T),
    /// `e^{iφ} I`; only observable when controlled.
    GlobalPhase(T),
}

impl<T: Real> GateKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::Ry(_) => "ry",
            GateKind::Rx(_) => "rx",
            GateKind::U1(_) => "u1",
            GateKind::GlobalPhase(_) => "gphase",
        }
    }

    /// Row-major 2×2 matrix `[m00, m01, m10, m11]`.
    pub fn matrix(&self) -> [Complex<T>; 4] {
        let z = Complex::zero();
        let o = Complex::one();
        let half = T::of(0.5);
        match *self {
            GateKind::X => [z, o, o, z],
            GateKind::H => {
                let s = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
                [s, s, s, -s]
            }
            GateKind::Ry(theta) => {
                let (s, c) = (theta * half).sin_cos();
                [
                    Complex::new(c, T::zero()),
                    Complex::new(-s, T::zero()),
                    Complex::new(s, T::zero()),
                    Complex::new(c, T::zero()),
                ]
            }
            GateKind::Rx(theta) => {
                let (s, c) = (theta * half).sin_cos();
                [
                    Complex::new(c, T::zero()),
                    Complex::new(T::zero(), -s),
                    Complex::new(T::zero(), -s),
                    Complex::new(c, T::zero()),
                ]
            }
            GateKind::U1(lambda) => [o, z, z, Complex::from_polar(T::one(), lambda)],
            GateKind::GlobalPhase(phi) => {
                let p = Complex::from_polar(T::one(), phi);
                [p, z, z, p]
            }
        }
    }

    pub fn inverse(&self) -> Self {
        match *self {
            GateKind::X => GateKind::X,
            GateKind::H => GateKind::H,
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rx(t) => GateKind::Rx(-t),
            GateKind::U1(t) => GateKind::U1(-t),
            GateKind::GlobalPhase(t) => GateKind::GlobalPhase(-t),
        }
    }
}

/// A control wire. `positive` conditions on |1⟩, otherwise on |0⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub positive: bool,
}

impl Control {
    pub fn pos(qubit: usize) -> Self {
        Self { qubit, positive: true }
    }

    pub fn neg(qubit: usize) -> Self {
        Self { qubit, positive: false }
    }
}

/// A (multi-)controlled single-qubit gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate<T> {
    pub kind: GateKind<T>,
    pub target: usize,
    pub controls: Vec<Control>,
}

impl<T: Real> Gate<T> {
    pub fn new(kind: GateKind<T>, target: usize) -> Self {
        Self {
            kind,
            target,
            controls: Vec::new(),
        }
    }

    pub fn controlled(kind: GateKind<T>, target: usize, controls: Vec<Control>) -> Self {
        Self { kind, target, controls }
    }

    pub fn inverse(&self) -> Self {
        Self {
            kind: self.kind.inverse(),
            target: self.target,
            controls: self.controls.clone(),
        }
    }

    /// CNOT-equivalent cost of a decomposition into CNOT + one-qubit gates.
    ///
    /// Uses `16k − 12` for `k ≥ 2` controls; a single control costs 1 for X
    /// and 2 otherwise. Controlled global phases cost as a phase on one fewer control.
    pub fn cnot_equivalents(&self) -> u64 {
        let k = self.controls.len() as u64;
        match self.kind {
            GateKind::GlobalPhase(_) => match k {
                0 | 1 => 0,
                2 => 2,
                _ => 16 * (k - 1) - 12,
            },
            GateKind::X => match k {
                0 => 0,
                1 => 1,
                _ => 16 * k - 12,
            },
            _ => match k {
                0 => 0,
                1 => 2,
                _ => 16 * k - 12,
            },
        }
    }
}
