//! Error type shared by every module.

use crate::solver::trajectory::Trajectory;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} outside admissible range [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("non-finite value produced while evaluating {0}")]
    NonFinite(String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("series truncated at M = {terms}: tail bound {tail:.3e} exceeds tolerance {tolerance:.3e}")]
    Truncation { terms: usize, tail: f64, tolerance: f64 },

    #[error("solvability condition violated: {0}")]
    Solvability(String),

    #[error("boundary-layer compatibility violated: a0 = {a0:.3e} (tolerance {tolerance:.1e})")]
    Compatibility { a0: f64, tolerance: f64 },

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("gap height collapsed: min S = {0:.3e}")]
    GeometryCollapse(f64),

    #[error("linear solver failed: {0}")]
    LinearSolver(String),

    #[error("run aborted at t = {t:.6}: {reason}")]
    RunAborted {
        t: f64,
        reason: String,
        partial: Box<Trajectory>,
    },

    #[error("snapshot pairing mismatch: {0}")]
    Pairing(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
