//! Dense statevector simulation of (multi-)controlled single-qubit circuits.
//!
//! Qubit 0 is the least significant bit of a basis-state index. Controlled
//! gates are applied directly as conditioned 2×2 updates; CNOT costs of their
//! decompositions are tracked symbolically in [`GateMetadata`].

mod circuit;
mod gate;
mod matrix;
mod state;

pub use circuit::{GateMetadata, Instruction, QuantumCircuit};
pub use gate::{Control, Gate, GateKind};
pub use matrix::CMatrix;
pub use state::{apply, circuit_unitary, multinomial, StateVector, MAX_UNITARY_QUBITS};
