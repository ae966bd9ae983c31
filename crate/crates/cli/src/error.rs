use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_STAGE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: wavescope::Error,
    },
    #[error("i/o error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Stage { .. } => EXIT_STAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>, e: impl ToString) -> Self {
        CliError::Io {
            path: path.into(),
            message: e.to_string(),
        }
    }

    /// Attributes a library error to `stage`; I/O failures keep their own
    /// exit code.
    pub fn stage(stage: impl Into<String>, source: wavescope::Error) -> Self {
        let stage = stage.into();
        match source {
            wavescope::Error::Io(message) => CliError::Io {
                path: PathBuf::from(stage),
                message,
            },
            source => CliError::Stage { stage, source },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
