//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown ticker {ticker:?}{}", suggestion.as_deref().map(|s| format!(" (did you mean {s:?}?)")).unwrap_or_default())]
    UnknownTicker {
        ticker: String,
        suggestion: Option<String>,
    },

    #[error("non-finite loss at epoch {epoch}, set {set_index} (target {target})")]
    NonFiniteLoss {
        epoch: usize,
        set_index: usize,
        target: String,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
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

    /// Machine-readable category, stable across releases. The CLI maps these
    /// to exit codes and prints them as `error[<category>]: ...`.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Config(_) => "config",
            Error::UnknownTicker { .. } => "not-found",
            Error::NonFiniteLoss { .. } => "numeric",
        }
    }
}
