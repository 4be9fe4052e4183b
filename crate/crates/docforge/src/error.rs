use std::path::PathBuf;

use thiserror::Error;

/// Failures of the std front end, split by the exit code they map to.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] docforge_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 1 for configuration problems, 2 for corpus and IO problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Core(docforge_core::Error::InvalidParameter(_)) => 1,
            _ => 2,
        }
    }
}
