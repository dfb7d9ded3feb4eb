//! Crate-wide error type.
//!
//! Variants are grouped by how the CLI reports them: usage errors exit with
//! code 1, data errors with 2, numeric failures with 3.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("duplicate id `{id}` in {path}: line {line} (first seen at line {first_line})")]
    DuplicateId {
        path: PathBuf,
        id: String,
        line: usize,
        first_line: usize,
    },

    #[error("unknown id `{id}` ({context})")]
    UnknownId { id: String, context: String },

    #[error("empty {what}")]
    Empty { what: String },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// Process exit code for the CLI: 1 usage, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 1,
            Error::Numeric(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
