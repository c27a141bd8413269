use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Argument outside its mathematical domain (e.g. probability not in [0,1]).
    #[error("domain error: {0}")]
    Domain(String),

    /// A probability vector or kernel failed validation.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Mismatched dimensions between objects that must agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A configuration value is missing, inconsistent, or unsupported.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A search space exceeds the sizes this crate enumerates exhaustively.
    #[error("search space too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn dist(msg: impl Into<String>) -> Self {
        Error::InvalidDistribution(msg.into())
    }
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub(crate) fn too_large(msg: impl Into<String>) -> Self {
        Error::TooLarge(msg.into())
    }
}
