use blockfresh::Error;
use thiserror::Error as ThisError;

/// Failures split by the exit code they map to.
#[derive(Debug, ThisError)]
pub enum CliError {
    /// Bad input: exit code 1.
    #[error("invalid input: {0}")]
    Validation(String),
    /// Failed while running: exit code 2.
    #[error("run failed: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::CoverageUnreachable { .. }
            | Error::ZeroThresholdDenominator
            | Error::Config(_) => CliError::Validation(e.to_string()),
            Error::StepTooLarge { .. }
            | Error::Graph { .. }
            | Error::IncompleteTrace { .. }
            | Error::Io(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
