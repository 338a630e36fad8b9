use thiserror::Error;

/// Exit codes are a stable contract: 0 success, 1 config, 2 validation, 3 numerical.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{0}")]
    Library(#[from] loggas::Error),
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Library(e) if e.is_numerical() => 3,
            CliError::Library(loggas::Error::AssumptionViolation(_)) => 2,
            CliError::Library(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
