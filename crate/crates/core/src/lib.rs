//! Desk-scale HHL for tridiagonal Toeplitz systems.
//!
//! The crate simulates the full pipeline on a dense statevector: polynomial
//! state preparation, Strang-split Hamiltonian simulation, multi-product
//! (Richardson) extrapolation across independent runs, phase estimation,
//! piecewise-Chebyshev eigenvalue inversion and observable estimation.
//! Classical oracles in [`linalg`] and [`toeplitz`] check every stage.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the pipeline and
//! the dense oracles run in `f64`. Aliases for the common instantiations
//! live at the crate root.

pub mod chebyshev;
pub mod error;
pub mod hamsim;
pub mod inversion;
pub mod lambert;
pub mod linalg;
pub mod mpf;
pub mod observables;
pub mod pipeline;
pub mod qpe;
pub mod scalar;
pub mod sim;
pub mod stateprep;
pub mod toeplitz;

pub use error::{Error, Result};
pub use scalar::Real;
pub use toeplitz::{Problem, RhsSpec, TridiagonalToeplitz};

pub type StateVectorF64 = sim::StateVector<f64>;
pub type CircuitF64 = sim::QuantumCircuit<f64>;
pub type CMatrixF64 = sim::CMatrix<f64>;
pub type ToeplitzF64 = toeplitz::TridiagonalToeplitz<f64>;
pub type DecompositionF64 = hamsim::ToeplitzDecomposition<f64>;
