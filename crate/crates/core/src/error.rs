use std::fmt;

/// Errors raised anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An index or flat position outside the valid range.
    #[error("index out of range: {0}")]
    Domain(String),
    /// Operand shapes that do not fit together.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A quantity that is mathematically undefined for the given input,
    /// e.g. a relative error against a zero tensor.
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl fmt::Display) -> Self {
        Error::Dimension(msg.to_string())
    }

    pub(crate) fn arg(msg: impl fmt::Display) -> Self {
        Error::InvalidArgument(msg.to_string())
    }
}
