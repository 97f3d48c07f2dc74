use std::collections::BTreeMap;

use serde::Serialize;

use super::gate::{Control, Gate, GateKind};
use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One step of a circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum Instruction<T> {
    Gate(Gate<T>),
    /// `body` applied `reps` times. Local qubit `i` of `body` acts on `wires[i]`.
    Repeat {
        body: Box<QuantumCircuit<T>>,
        wires: Vec<usize>,
        controls: Vec<Control>,
        reps: u64,
    },
    /// Dense unitary on `wires`; local bit `i` of the matrix index is `wires[i]`.
    Oracle {
        matrix: CMatrix<T>,
        wires: Vec<usize>,
        controls: Vec<Control>,
        label: String,
    },
}

impl<T: Real> Instruction<T> {
    fn qubits(&self) -> Vec<usize> {
        match self {
            Instruction::Gate(g) => {
                let mut q: Vec<usize> = g.controls.iter().map(|c| c.qubit).collect();
                q.push(g.target);
                q
            }
            Instruction::Repeat { wires, controls, .. } | Instruction::Oracle { wires, controls, .. } => {
                wires.iter().copied().chain(controls.iter().map(|c| c.qubit)).collect()
            }
        }
    }

    fn inverse(&self) -> Self {
        match self {
            Instruction::Gate(g) => Instruction::Gate(g.inverse()),
            Instruction::Repeat {
                body,
                wires,
                controls,
                reps,
            } => Instruction::Repeat {
                body: Box::new(body.inverse()),
                wires: wires.clone(),
                controls: controls.clone(),
                reps: *reps,
            },
            Instruction::Oracle {
                matrix,
                wires,
                controls,
                label,
            } => Instruction::Oracle {
                matrix: matrix.adjoint(),
                wires: wires.clone(),
                controls: controls.clone(),
                label: format!("{label}^dag"),
            },
        }
    }

    fn with_controls(&self, extra: &[Control]) -> Self {
        let extend = |c: &Vec<Control>| c.iter().chain(extra).copied().collect::<Vec<_>>();
        match self {
            Instruction::Gate(g) => Instruction::Gate(Gate::controlled(g.kind, g.target, extend(&g.controls))),
            Instruction::Repeat {
                body,
                wires,
                controls,
                reps,
            } => Instruction::Repeat {
                body: body.clone(),
                wires: wires.clone(),
                controls: extend(controls),
                reps: *reps,
            },
            Instruction::Oracle {
                matrix,
                wires,
                controls,
                label,
            } => Instruction::Oracle {
                matrix: matrix.clone(),
                wires: wires.clone(),
                controls: extend(controls),
                label: label.clone(),
            },
        }
    }

    fn remap(&self, map: &[usize]) -> Self {
        let rc = |c: &Vec<Control>| {
            c.iter()
                .map(|c| Control {
                    qubit: map[c.qubit],
                    positive: c.positive,
                })
                .collect::<Vec<_>>()
        };
        match self {
            Instruction::Gate(g) => Instruction::Gate(Gate::controlled(g.kind, map[g.target], rc(&g.controls))),
            Instruction::Repeat {
                body,
                wires,
                controls,
                reps,
            } => Instruction::Repeat {
                body: body.clone(),
                wires: wires.iter().map(|&w| map[w]).collect(),
                controls: rc(controls),
                reps: *reps,
            },
            Instruction::Oracle {
                matrix,
                wires,
                controls,
                label,
            } => Instruction::Oracle {
                matrix: matrix.clone(),
                wires: wires.iter().map(|&w| map[w]).collect(),
                controls: rc(controls),
                label: label.clone(),
            },
        }
    }
}

/// Gate-count summary used for CNOT-equivalent accounting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GateMetadata {
    /// Gate count per kind name (`"ry"`, `"x"`, ...), repetitions expanded.
    pub by_kind: BTreeMap<String, u64>,
    /// Gate count per number of controls.
    pub by_arity: BTreeMap<usize, u64>,
    /// Number of dense oracle applications.
    pub oracle_calls: u64,
    /// Total CNOT-equivalents, see [`Gate::cnot_equivalents`].
    pub cnot_equivalents: u64,
    /// Occurrences of labelled sub-circuits appended with [`QuantumCircuit::append_labeled`].
    pub labels: BTreeMap<String, u64>,
}

impl GateMetadata {
    fn absorb(&mut self, other: &GateMetadata, times: u64) {
        for (k, v) in &other.by_kind {
            *self.by_kind.entry(k.clone()).or_default() += v * times;
        }
        for (k, v) in &other.by_arity {
            *self.by_arity.entry(*k).or_default() += v * times;
        }
        for (k, v) in &other.labels {
            *self.labels.entry(k.clone()).or_default() += v * times;
        }
        self.oracle_calls += other.oracle_calls * times;
        self.cnot_equivalents += other.cnot_equivalents * times;
    }

    pub fn total_gates(&self) -> u64 {
        self.by_kind.values().sum()
    }
}

/// Ordered list of instructions on `n_qubits` wires. Qubit 0 is the least
/// significant bit of a basis-state index.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCircuit<T> {
    n_qubits: usize,
    instructions: Vec<Instruction<T>>,
    labels: BTreeMap<String, u64>,
}

impl<T: Real> QuantumCircuit<T> {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            instructions: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn instructions(&self) -> &[Instruction<T>] {
        &self.instructions
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    fn check(&self, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::TargetIsControl(q));
            }
        }
        Ok(())
    }

    /// Appends an instruction after validating its wires.
    pub fn push(&mut self, ins: Instruction<T>) -> Result<&mut Self> {
        self.check(&ins.qubits())?;
        match &ins {
            Instruction::Repeat { body, wires, .. } if body.n_qubits != wires.len() => {
                return Err(Error::DimensionMismatch {
                    expected: body.n_qubits,
                    got: wires.len(),
                })
            }
            Instruction::Oracle { matrix, wires, .. } if matrix.dim() != 1usize << wires.len() => {
                return Err(Error::DimensionMismatch {
                    expected: 1usize << wires.len(),
                    got: matrix.dim(),
                })
            }
            _ => {}
        }
        self.instructions.push(ins);
        Ok(self)
    }

    pub fn gate(&mut self, g: Gate<T>) -> Result<&mut Self> {
        self.push(Instruction::Gate(g))
    }

    pub fn x(&mut self, q: usize) -> Result<&mut Self> {
        self.gate(Gate::new(GateKind::X, q))
    }

    pub fn h(&mut self, q: usize) -> Result<&mut Self> {
        self.gate(Gate::new(GateKind::H, q))
    }

    pub fn ry(&mut self, theta: T, q: usize) -> Result<&mut Self> {
        self.gate(Gate::new(GateKind::Ry(theta), q))
    }

    pub fn rx(&mut self, theta: T, q: usize) -> Result<&mut Self> {
        self.gate(Gate::new(GateKind::Rx(theta), q))
    }

    pub fn u1(&mut self, lambda: T, q: usize) -> Result<&mut Self> {
        self.gate(Gate::new(GateKind::U1(lambda), q))
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.gate(Gate::controlled(GateKind::X, target, vec![Control::pos(control)]))
    }

    pub fn mc(&mut self, kind: GateKind<T>, target: usize, controls: Vec<Control>) -> Result<&mut Self> {
        self.gate(Gate::controlled(kind, target, controls))
    }

    /// Appends every instruction of `other`, which must have the same width.
    pub fn append(&mut self, other: &QuantumCircuit<T>) -> Result<&mut Self> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        self.instructions.extend(other.instructions.iter().cloned());
        for (k, v) in &other.labels {
            *self.labels.entry(k.clone()).or_default() += v;
        }
        Ok(self)
    }

    /// Appends `other` and records one occurrence of `label` in the metadata.
    pub fn append_labeled(&mut self, label: &str, other: &QuantumCircuit<T>) -> Result<&mut Self> {
        self.append(other)?;
        *self.labels.entry(label.to_string()).or_default() += 1;
        Ok(self)
    }

    /// Appends `other` (narrower) with its qubit `i` placed on `wires[i]`.
    pub fn append_on(&mut self, other: &QuantumCircuit<T>, wires: &[usize]) -> Result<&mut Self> {
        let embedded = other.embed(self.n_qubits, wires)?;
        self.append(&embedded)
    }

    /// Re-targets the circuit onto a wider register.
    pub fn embed(&self, n_qubits: usize, wires: &[usize]) -> Result<Self> {
        if wires.len() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: wires.len(),
            });
        }
        let mut out = QuantumCircuit::new(n_qubits);
        for ins in &self.instructions {
            out.push(ins.remap(wires))?;
        }
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Formal inverse: reversed order, each instruction inverted.
    pub fn inverse(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            instructions: self.instructions.iter().rev().map(Instruction::inverse).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Every instruction gains the extra controls. Controls must be disjoint
    /// from the circuit's existing wires.
    pub fn controlled(&self, extra: &[Control]) -> Result<Self> {
        let mut out = QuantumCircuit::new(self.n_qubits);
        for ins in &self.instructions {
            out.push(ins.with_controls(extra))?;
        }
        out.labels = self.labels.clone();
        Ok(out)
    }

    pub fn metadata(&self) -> GateMetadata {
        let mut md = GateMetadata {
            labels: self.labels.clone(),
            ..Default::default()
        };
        for ins in &self.instructions {
            match ins {
                Instruction::Gate(g) => {
                    *md.by_kind.entry(g.kind.name().to_string()).or_default() += 1;
                    *md.by_arity.entry(g.controls.len()).or_default() += 1;
                    md.cnot_equivalents += g.cnot_equivalents();
                }
                Instruction::Repeat {
                    body, controls, reps, ..
                } => {
                    let inner = if controls.is_empty() {
                        body.metadata()
                    } else {
                        body.controlled_metadata(controls.len())
                    };
                    md.absorb(&inner, *reps);
                }
                Instruction::Oracle { .. } => md.oracle_calls += 1,
            }
        }
        md
    }

    /// Metadata as if `k` extra controls were added to every gate.
    fn controlled_metadata(&self, k: usize) -> GateMetadata {
        let mut wide = QuantumCircuit::new(self.n_qubits + k);
        let extra: Vec<Control> = (self.n_qubits..self.n_qubits + k).map(Control::pos).collect();
        for ins in &self.instructions {
            // Push cannot fail: the extra wires are fresh.
            wide.instructions.push(ins.with_controls(&extra));
        }
        wide.labels = self.labels.clone();
        wide.metadata()
    }
}
