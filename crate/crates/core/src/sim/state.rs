use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::circuit::{Instruction, QuantumCircuit};
use super::gate::{Control, Gate, GateKind};
use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Widest circuit for which [`circuit_unitary`] builds a dense matrix.
pub const MAX_UNITARY_QUBITS: usize = 12;

/// Widest body a [`Instruction::Repeat`] is condensed into a dense power for.
const DENSE_REPEAT_QUBITS: usize = 8;

/// Dense statevector. Basis index bit `q` is the value of qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

/// Iterates the indices whose `mask` bits equal `value`.
fn for_each_fixed(dim: usize, mask: usize, value: usize, mut f: impl FnMut(usize)) {
    let mut cur = 0usize;
    while cur < dim {
        f(cur | value);
        cur = ((cur | mask) + 1) & !mask;
    }
}

fn control_bits(controls: &[Control]) -> (usize, usize) {
    controls.iter().fold((0, 0), |(m, v), c| {
        (m | (1 << c.qubit), if c.positive { v | (1 << c.qubit) } else { v })
    })
}

impl<T: Real> StateVector<T> {
    /// |0…0⟩ on `n_qubits` wires.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(n_qubits >= 1, "a statevector needs at least one qubit");
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index {index} out of range");
        let mut amps = vec![Complex::zero(); dim];
        amps[index] = Complex::one();
        Self { n_qubits, amps }
    }

    /// Normalizes `amps`, whose length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "{dim} amplitudes is not 2^n with n >= 1"
            )));
        }
        let norm = amps.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        if norm == T::zero() {
            return Err(Error::InvalidArgument("zero vector cannot be normalized".into()));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            amps: amps.into_iter().map(|z| z / norm).collect(),
        })
    }

    /// Normalized real vector.
    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    /// `low ⊗ high` with `low` on qubits `0..low.n_qubits`.
    pub fn tensor(low: &Self, high: &Self) -> Self {
        let mut amps = Vec::with_capacity(low.amps.len() * high.amps.len());
        for h in &high.amps {
            for l in &low.amps {
                amps.push(l * h);
            }
        }
        Self {
            n_qubits: low.n_qubits + high.n_qubits,
            amps,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    /// Applies the circuit in place.
    pub fn apply(&mut self, circuit: &QuantumCircuit<T>) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: circuit.n_qubits(),
            });
        }
        for ins in circuit.instructions() {
            self.apply_instruction(ins, &[], None)?;
        }
        Ok(())
    }

    /// `map` relabels the instruction's wires, `extra` adds controls.
    fn apply_instruction(&mut self, ins: &Instruction<T>, extra: &[Control], map: Option<&[usize]>) -> Result<()> {
        let m = |q: usize| map.map_or(q, |w| w[q]);
        let mc = |cs: &[Control]| {
            cs.iter()
                .map(|c| Control {
                    qubit: m(c.qubit),
                    positive: c.positive,
                })
                .chain(extra.iter().copied())
                .collect::<Vec<_>>()
        };
        match ins {
            Instruction::Gate(g) => {
                self.apply_gate(&Gate::controlled(g.kind, m(g.target), mc(&g.controls)));
                Ok(())
            }
            Instruction::Oracle {
                matrix,
                wires,
                controls,
                ..
            } => {
                let wires: Vec<usize> = wires.iter().map(|&w| m(w)).collect();
                self.apply_dense(matrix, &wires, &mc(controls));
                Ok(())
            }
            Instruction::Repeat {
                body,
                wires,
                controls,
                reps,
            } => {
                let wires: Vec<usize> = wires.iter().map(|&w| m(w)).collect();
                let controls = mc(controls);
                if body.n_qubits() <= DENSE_REPEAT_QUBITS {
                    let u = circuit_unitary(body)?.pow(*reps);
                    self.apply_dense(&u, &wires, &controls);
                } else {
                    for _ in 0..*reps {
                        for inner in body.instructions() {
                            self.apply_instruction(inner, &controls, Some(&wires))?;
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn apply_gate(&mut self, g: &Gate<T>) {
        let dim = self.amps.len();
        let (cmask, cval) = control_bits(&g.controls);
        let t = 1usize << g.target;
        let amps = &mut self.amps;
        match g.kind {
            GateKind::X => for_each_fixed(dim, cmask | t, cval, |i| amps.swap(i, i | t)),
            GateKind::U1(lambda) => {
                let p = Complex::from_polar(T::one(), lambda);
                for_each_fixed(dim, cmask | t, cval | t, |i| amps[i] *= p);
            }
            GateKind::GlobalPhase(phi) => {
                let p = Complex::from_polar(T::one(), phi);
                for_each_fixed(dim, cmask, cval, |i| amps[i] *= p);
            }
            kind => {
                let [m00, m01, m10, m11] = kind.matrix();
                for_each_fixed(dim, cmask | t, cval, |i| {
                    let (a0, a1) = (amps[i], amps[i | t]);
                    amps[i] = m00 * a0 + m01 * a1;
                    amps[i | t] = m10 * a0 + m11 * a1;
                });
            }
        }
    }

    fn apply_dense(&mut self, u: &CMatrix<T>, wires: &[usize], controls: &[Control]) {
        let dim = self.amps.len();
        let (cmask, cval) = control_bits(controls);
        let wmask = wires.iter().fold(0usize, |m, &w| m | (1 << w));
        let k = 1usize << wires.len();
        let offsets: Vec<usize> = (0..k)
            .map(|j| {
                wires
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| (j >> b) & 1 == 1)
                    .fold(0, |o, (_, &w)| o | (1 << w))
            })
            .collect();
        let mut buf = vec![Complex::zero(); k];
        let amps = &mut self.amps;
        for_each_fixed(dim, cmask | wmask, cval, |base| {
            for (b, &o) in buf.iter_mut().zip(&offsets) {
                *b = amps[base | o];
            }
            let out = u.mul_vec(&buf);
            for (v, &o) in out.into_iter().zip(&offsets) {
                amps[base | o] = v;
            }
        });
    }

    /// Probability that `qubit` reads `outcome`.
    pub fn probability(&self, qubit: usize, outcome: bool) -> T {
        self.pattern_probability(&[(qubit, outcome)])
    }

    /// Probability of a joint pattern of (qubit, bit) pairs.
    pub fn pattern_probability(&self, pattern: &[(usize, bool)]) -> T {
        let (mask, val) = pattern_bits(pattern);
        let mut p = T::zero();
        for_each_fixed(self.amps.len(), mask, val, |i| p += self.amps[i].norm_sqr());
        p
    }

    /// Projects onto `qubit = outcome`, returning the outcome probability and
    /// the renormalized post-measurement state.
    pub fn post_select(&self, qubit: usize, outcome: bool) -> Result<(T, Self)> {
        self.post_select_pattern(&[(qubit, outcome)])
    }

    pub fn post_select_pattern(&self, pattern: &[(usize, bool)]) -> Result<(T, Self)> {
        for &(q, _) in pattern {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        let p = self.pattern_probability(pattern);
        if p <= T::epsilon() * T::epsilon() {
            return Err(Error::ImpossibleOutcome);
        }
        let (mask, val) = pattern_bits(pattern);
        let s = p.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, z)| if i & mask == val { z / s } else { Complex::zero() })
            .collect();
        Ok((
            p,
            Self {
                n_qubits: self.n_qubits,
                amps,
            },
        ))
    }

    /// Unnormalized amplitudes of `qubits` (index bit `k` is `qubits[k]`) on
    /// the branch where `pattern` holds.
    pub fn branch_amplitudes(&self, qubits: &[usize], pattern: &[(usize, bool)]) -> Vec<Complex<T>> {
        let (mask, val) = pattern_bits(pattern);
        let mut out = vec![Complex::zero(); 1 << qubits.len()];
        for (i, z) in self.amps.iter().enumerate() {
            if i & mask != val {
                continue;
            }
            let k = qubits
                .iter()
                .enumerate()
                .fold(0usize, |k, (b, &q)| k | (((i >> q) & 1) << b));
            out[k] += z;
        }
        out
    }

    /// Exact marginal distribution over `qubits`; index bit `k` is `qubits[k]`.
    pub fn marginal(&self, qubits: &[usize]) -> Vec<T> {
        let mut out = vec![T::zero(); 1 << qubits.len()];
        for (i, z) in self.amps.iter().enumerate() {
            let k = qubits
                .iter()
                .enumerate()
                .fold(0usize, |k, (b, &q)| k | (((i >> q) & 1) << b));
            out[k] += z.norm_sqr();
        }
        out
    }

    /// Multinomial draw of `shots` outcomes of `qubits`. Keys are bitstrings
    /// with `qubits[0]` as the rightmost character.
    pub fn sample_counts(&self, qubits: &[usize], shots: u64, seed: u64) -> Result<BTreeMap<String, u64>> {
        if shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        let probs: Vec<f64> = self.marginal(qubits).into_iter().map(T::to_f64_lossy).collect();
        let counts = multinomial(&probs, shots, seed)?;
        let width = qubits.len();
        Ok(counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(k, c)| (format!("{k:0width$b}"), c))
            .collect())
    }
}

fn pattern_bits(pattern: &[(usize, bool)]) -> (usize, usize) {
    pattern.iter().fold((0, 0), |(m, v), &(q, b)| {
        (m | (1 << q), if b { v | (1 << q) } else { v })
    })
}

/// Exact multinomial sample via sequential conditional binomials.
pub fn multinomial(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = probs.iter().sum();
    let mut remaining_mass = total;
    let mut remaining = shots;
    let mut out = vec![0u64; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() || remaining_mass <= 0.0 {
            out[i] = remaining;
            break;
        }
        let q = (p / remaining_mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, q)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .sample(&mut rng);
        out[i] = draw;
        remaining -= draw;
        remaining_mass -= p;
    }
    Ok(out)
}

/// Out-of-place application.
pub fn apply<T: Real>(circuit: &QuantumCircuit<T>, state: &StateVector<T>) -> Result<StateVector<T>> {
    let mut s = state.clone();
    s.apply(circuit)?;
    Ok(s)
}

/// Dense unitary; column `k` is the image of basis state `k`.
pub fn circuit_unitary<T: Real>(circuit: &QuantumCircuit<T>) -> Result<CMatrix<T>> {
    let n = circuit.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::SizeCap {
            what: "circuit width for dense unitary",
            got: n,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut u = CMatrix::zeros(dim);
    for k in 0..dim {
        let mut s = StateVector::basis(n, k);
        s.apply(circuit)?;
        for (r, z) in s.amps.iter().enumerate() {
            u.set(r, k, *z);
        }
    }
    Ok(u)
}
