use std::path::PathBuf;

use thiserror::Error;

/// Errors of the file formats and the experiment runner.
#[derive(Debug, Error)]
pub enum WkitError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error("certificate checksum mismatch: stored {stored}, computed {computed}")]
    Checksum { stored: String, computed: String },
    #[error(transparent)]
    Core(#[from] wkit_core::Error),
}

impl WkitError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        WkitError::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from the configuration rather than from a
    /// failed property.
    pub fn is_config(&self) -> bool {
        match self {
            WkitError::Config(_) | WkitError::Json(_) | WkitError::Io { .. } | WkitError::Parse { .. } => true,
            WkitError::Core(e) => matches!(
                e,
                wkit_core::Error::Config(_)
                    | wkit_core::Error::Argument(_)
                    | wkit_core::Error::Order { .. }
                    | wkit_core::Error::Size { .. }
                    | wkit_core::Error::EmptyInput(_)
            ),
            WkitError::Csv(_) | WkitError::Checksum { .. } => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, WkitError>;
