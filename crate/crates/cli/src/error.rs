use thiserror::Error;

/// Errors surfaced by the command line, split by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configuration or model parameters (exit 2).
    #[error("{0}")]
    Usage(String),
    /// Unreadable, unwritable or malformed files (exit 1).
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 1,
        }
    }
}

impl From<diamondperc::Error> for CliError {
    fn from(e: diamondperc::Error) -> Self {
        match e {
            diamondperc::Error::Io(_) | diamondperc::Error::Parse { .. } => CliError::Input(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
