use std::path::PathBuf;

use proc_shadow::ShadowError;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Records {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("record version {found} is not supported (expected {expected})")]
    Version { expected: u32, found: u32 },

    #[error(transparent)]
    Shadow(#[from] ShadowError),

    #[error("{0}")]
    Other(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration errors, 3 for refused problem sizes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_)
            | HarnessError::Shadow(ShadowError::Parse(_) | ShadowError::InvalidParameter(_)) => 2,
            HarnessError::Shadow(ShadowError::UnsupportedSize { .. }) => 3,
            _ => 1,
        }
    }
}
