use std::fmt;

/// CLI-level error with the process exit code it maps to:
/// 1 validation/usage, 2 I/O, 3 fit failure.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Fit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Fit(_) => 3,
        }
    }

    pub fn validation(message: impl Into<String>) -> CliError {
        CliError::Validation(message.into())
    }

    pub fn io(message: impl Into<String>) -> CliError {
        CliError::Io(message.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Fit(m) => write!(f, "fit error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<etpa_core::Error> for CliError {
    fn from(err: etpa_core::Error) -> CliError {
        match err {
            etpa_core::Error::FitDidNotConverge { .. } | etpa_core::Error::ImplausibleFit { .. } => {
                CliError::Fit(err.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> CliError {
        CliError::Io(err.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> CliError {
        if err.is_io_error() {
            CliError::Io(err.to_string())
        } else {
            CliError::Validation(err.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
