use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the range where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    Input(String),
    /// Input is well formed but degenerate for the requested operation
    /// (constant function, empty set, zero mass).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// A truncated profile carries too much mass beyond the cut-off.
    #[error("truncation too short: {detail}; suggested r_max = {suggested_r_max}")]
    Truncation { detail: String, suggested_r_max: f64 },
    /// The input violates a structural requirement of the target model.
    #[error("model violation: {0}")]
    ModelViolation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}
