use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::DocId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corpus root {0} does not exist or is not a directory")]
    MissingCorpus(PathBuf),
    #[error("class `{0}` has no usable documents")]
    EmptyClass(String),
    #[error("class `{class}` has {count} document(s); at least {needed} required")]
    ClassTooSmall {
        class: String,
        count: usize,
        needed: usize,
    },
    #[error("duplicate document id `{0}`")]
    DuplicateDocument(DocId),
    #[error("unknown document id `{0}`")]
    UnknownDocument(DocId),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("document `{0}` has no tokens")]
    EmptyDocument(DocId),
    #[error("document `{0}` is unlabeled where a label is required")]
    MissingLabel(DocId),
    #[error("no labeled points available")]
    NoLabeledPoints,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed {what} at line {line}: {message}")]
    Parse {
        what: &'static str,
        line: usize,
        message: String,
    },
    #[error("failed to (de)serialize model: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: &'static str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            what,
            line,
            message: message.into(),
        }
    }

    /// True for errors that indicate a broken internal invariant rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
