use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the geometric models, point-set tooling and study harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("validation: {0}")]
    Validation(String),

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// The interpolation system could not be factored or its condition
    /// estimate exceeds the refusal threshold.
    #[error("ill-conditioned system (condition estimate {condition:.3e}): {advice}")]
    IllConditioned { condition: f64, advice: String },

    #[error("degenerate jet: {0}")]
    DegenerateJet(String),

    #[error("config: field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag used as the CLI error prefix.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Validation(_) => "validation",
            Error::Parse { .. } => "parse",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::IllConditioned { .. } => "ill-conditioned",
            Error::DegenerateJet(_) => "degenerate-jet",
            Error::Config { .. } => "config",
            Error::Io { .. } => "io",
        }
    }

    /// The message without the kind prefix that `Display` adds.
    pub fn detail(&self) -> String {
        match self {
            Error::InvalidArgument(m) | Error::Validation(m) | Error::DegenerateJet(m) => m.clone(),
            Error::Parse { path, line, message } => format!("{}:{line}: {message}", path.display()),
            Error::LengthMismatch { expected, actual } => format!("expected {expected}, got {actual}"),
            Error::IllConditioned { condition, advice } => format!("condition estimate {condition:.3e}: {advice}"),
            Error::Config { field, message } => format!("field `{field}`: {message}"),
            Error::Io { path, source } => format!("{}: {source}", path.display()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
