use soblab_core::Error as CoreError;
use thiserror::Error;

/// Everything that can stop a run before a report is produced.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {what}: {detail}")]
    Parse { what: String, detail: String },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn parse(what: impl Into<String>, detail: impl ToString) -> Self {
        CliError::Parse { what: what.into(), detail: detail.to_string() }
    }

    /// A violated model requirement is a failed check; everything else is
    /// bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CoreError::ModelViolation(_)) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
