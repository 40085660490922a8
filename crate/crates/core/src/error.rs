use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed FCIDUMP (or other text input) with the 1-based line it was found on.
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Input configuration lies outside the sector the wavefunction is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {0}")]
    Resource(String),

    /// Both tokens forbidden by a sector mask.
    #[error("infeasible sector mask at position {position}")]
    Infeasible { position: usize },

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("input not found: {0}")]
    InputNotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable kind used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Format { .. } => "format",
            Error::Argument(_) => "argument",
            Error::Domain(_) => "domain",
            Error::Resource(_) => "resource",
            Error::Infeasible { .. } => "infeasible",
            Error::Internal(_) => "internal",
            Error::Sampling(_) => "sampling",
            Error::Training(_) => "training",
            Error::InputNotFound(_) => "input-not-found",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
