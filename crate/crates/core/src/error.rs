use thiserror::Error;

/// Failure modes of the library. Every fallible operation returns this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("gate target {0} also appears among its controls")]
    TargetIsControl(usize),

    #[error("impossible-outcome: measured pattern has zero probability")]
    ImpossibleOutcome,

    #[error("size cap exceeded: {what} is {got}, limit {limit}")]
    SizeCap {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("singular-system: eigenvalue {index} vanishes")]
    SingularSystem { index: usize },

    #[error("indefinite spectrum (lambda_min = {lambda_min}); default parameter derivation needs a positive-definite matrix")]
    IndefiniteSpectrum { lambda_min: f64 },

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("duplicate Trotter exponent {0}")]
    DuplicateExponent(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
