use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("could not parse provider reply: {0}")]
    Reply(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("input rejected before sending: {0}")]
    InputTooLarge(String),

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Precondition(_) | Error::Unsupported(_) => 2,
            Error::EmptyInput(_) | Error::Parse { .. } | Error::Io { .. } | Error::Json(_) => 3,
            Error::Provider(_) | Error::Reply(_) | Error::InputTooLarge(_) => 4,
            Error::Integrity(_) => 5,
        }
    }
}

/// Failure talking to an external model service.
#[derive(Debug, Clone, Error)]
pub enum ProviderError {
    #[error("transient failure (status {status:?}): {message}")]
    Transient { status: Option<u16>, message: String },

    #[error("request failed with status {status}: {message}")]
    Status { status: u16, message: String },

    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: Box<ProviderError> },

    #[error("provider contract violated: {0}")]
    Contract(String),

    #[error("no recorded response for fingerprint {0}")]
    NotRecorded(String),
}

impl ProviderError {
    pub fn is_transient(&self) -> bool {
        matches!(self, ProviderError::Transient { .. })
    }
}
