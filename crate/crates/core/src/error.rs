use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no token reaches min_count = {min_count}")]
    EmptyVocabulary { min_count: usize },

    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        path: String,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("dataset {0} contains no documents")]
    EmptyDataset(String),

    #[error("class {0} has no training samples")]
    DegenerateClass(usize),

    #[error("class {0} has no samples to stratify")]
    EmptyClass(usize),

    #[error("sequence of length {len} is too short, need at least {required}")]
    SequenceTooShort { len: usize, required: usize },

    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model file: {0}")]
    ModelFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Format { .. }
            | Error::DimensionMismatch { .. }
            | Error::EmptyDataset(_)
            | Error::EmptyVocabulary { .. }
            | Error::EmptyClass(_)
            | Error::DegenerateClass(_)
            | Error::LengthMismatch { .. }
            | Error::ModelFormat(_)
            | Error::Io { .. } => 3,
            Error::SequenceTooShort { .. } | Error::Numeric(_) => 4,
        }
    }
}
