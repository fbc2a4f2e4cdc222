use std::io;

use thiserror::Error;

/// Errors raised anywhere in the extraction toolkit.
#[derive(Debug, Error)]
pub enum ValexError {
    /// A text input could not be parsed.
    #[error("{source_name}:{line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },

    /// Input data violates a structural precondition.
    #[error("invalid data: {0}")]
    Data(String),

    /// A numeric precondition or invariant failed.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl ValexError {
    pub(crate) fn format(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        ValexError::Format {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn data(message: impl Into<String>) -> Self {
        ValexError::Data(message.into())
    }

    pub(crate) fn numeric(message: impl Into<String>) -> Self {
        ValexError::Numeric(message.into())
    }

    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        ValexError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ValexError::Format { .. } | ValexError::Data(_) | ValexError::Io { .. } => 2,
            ValexError::Numeric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, ValexError>;
