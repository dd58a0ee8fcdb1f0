use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("table has {table_rows} rows but embedding file has {embedding_rows} vectors")]
    Alignment {
        table_rows: usize,
        embedding_rows: usize,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("column `{0}` has fewer than two distinct values")]
    DegenerateColumn(String),

    #[error("could only corrupt {achieved} of {required} rows without violating pair constraints")]
    NoCandidateValue { required: usize, achieved: usize },

    #[error("target column `{0}` needs at least two distinct categorical values")]
    DegenerateTarget(String),

    #[error("{rows} rows cannot be split into {folds} folds")]
    TooFewRows { rows: usize, folds: usize },

    #[error("class mismatch: {0}")]
    ClassMismatch(String),

    #[error("expected {expected} rows, found {found}")]
    RowCountMismatch { expected: usize, found: usize },

    #[error("invalid probability matrix: {0}")]
    InvalidProbabilities(String),

    #[error("class {0} has no labeled rows")]
    EmptyClass(usize),

    #[error("confident joint has no counts")]
    DegenerateJoint,

    #[error("dirty set is empty")]
    EmptyDirtySet,

    #[error("clean validation set is empty")]
    EmptyCleanSet,

    #[error("invalid valuation input: {0}")]
    InvalidValuationInput(String),

    #[error("brute-force enumeration supports at most {max} tuples, got {size}")]
    TooLarge { size: usize, max: usize },

    #[error("row id {0} is out of range")]
    UnknownRowId(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by caller-supplied parameters rather than by
    /// the data itself.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::InvalidConfig(_) | Error::UnknownColumn(_))
    }
}
