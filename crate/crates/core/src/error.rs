use thiserror::Error;

/// Failure classes surfaced by the library. The CLI maps each class to an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e}): {what}")]
    NonConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("ill-conditioned system (condition estimate {condition:.3e}): {what}")]
    Conditioning { what: String, condition: f64 },
    #[error("sampling failure: {0}")]
    Sampling(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that originate in numerics rather than in user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Resolution(_)
                | Error::Conditioning { .. }
                | Error::Sampling(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
