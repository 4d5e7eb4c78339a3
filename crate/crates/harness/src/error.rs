use std::io;
use std::path::PathBuf;

use efk_core::EfkError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerics error: {0}")]
    Numerics(#[from] EfkError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("I/O error: {0}")]
    Output(String),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 config, 2 numerics, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Numerics(_) => 2,
            HarnessError::Io { .. } | HarnessError::Output(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
