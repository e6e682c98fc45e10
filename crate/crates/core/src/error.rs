use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operands of incompatible dimension.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// A value violated an argument precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A point lies outside the domain of a mirror map.
    #[error("point outside domain: {0}")]
    Domain(String),

    /// A bookkeeping contract was broken (duplicate push, missing decision, ...).
    #[error("logic error: {0}")]
    Logic(String),

    /// Inconsistent game or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Least-squares fit had too few usable points.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
