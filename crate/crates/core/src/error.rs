use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The pair correlation is 0/0 and no value is assigned to this combination.
    #[error("correlation undefined: m_C = {m_c}, m_T = {m_t}, N = {pairs}")]
    UndefinedCorrelation { m_c: u64, m_t: u64, pairs: u64 },

    #[error("numerical error: {0}")]
    Numeric(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
