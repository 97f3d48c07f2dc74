//! End-to-end orchestration: parameter derivation, the `l` extrapolation
//! runs, classical combination and report files.

mod plan;
mod report;
mod run;

pub use plan::*;
pub use report::*;
pub use run::*;

/// Schema version written into every JSON output.
pub const SPEC_VERSION: &str = "1.0";
