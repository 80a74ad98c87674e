//! Crate-wide error and result types.

use std::path::PathBuf;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the mining toolchain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("comment extraction failed in {file} at line {line}: {message}")]
    Extract {
        file: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("external vector file is missing {count} comment id(s), first missing: {first}")]
    MissingVectors { count: usize, first: String },

    #[error("unknown clone group id: {0}")]
    UnknownGroup(String),

    #[error("unknown repository id: {0}")]
    UnknownRepo(String),

    #[error("unknown {dimension} vocabulary term: {term}")]
    UnknownVocabulary { dimension: String, term: String },

    #[error("history query failed: {0}")]
    History(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
