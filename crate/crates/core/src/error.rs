use thiserror::Error;

/// Errors shared by operators, functions, problem builders and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A requested operation has no closed form for this function kind.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A solver configuration violates a stated precondition.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// The problem lacks data required by the requested feature
    /// (exact conjugates, orthonormal operator, reference solution, ...).
    #[error("missing capability: {0}")]
    MissingCapability(String),

    /// An iterative estimator ran out of iterations; carries its last value.
    #[error("{what} did not converge within the iteration budget (last estimate {last_estimate})")]
    NonConvergence { what: String, last_estimate: f64 },

    /// Random instance construction failed repeatedly.
    #[error("instance construction failed after {attempts} attempts: {reason}")]
    Construction { attempts: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
