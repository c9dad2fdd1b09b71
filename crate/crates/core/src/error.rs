use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library.
///
/// [`Error::category`] groups them into usage, data and numerical failures so
/// callers (the CLI in particular) can map them to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("row {row} is not a probability vector (sum {sum})")]
    NotOnSimplex { row: usize, sum: f64 },

    #[error("equicorrelation matrix with rho = {rho} is not positive definite for P = {p}")]
    NotPositiveDefinite { rho: f64, p: usize },

    #[error("unknown scenario {0:?} (expected \"soft\" or \"hard\")")]
    UnknownScenario(String),

    #[error("exhaustive permutation alignment supports at most 8 states, got {0}")]
    TooManyStates(usize),

    #[error("state {state} has {count} observations; at least 2 are required")]
    InsufficientObservations { state: usize, count: usize },

    #[error("class {0} does not occur in the reference labels")]
    AbsentClass(usize),

    #[error("{0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("header mismatch: {0}")]
    HeaderMismatch(String),

    #[error("missing value at row {row}, column {column:?}")]
    MissingValue { row: usize, column: String },

    #[error("cannot parse {value:?} at row {row}, column {column:?}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
}

/// Coarse classification of an [`Error`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidConfig(_) | Error::UnknownScenario(_) | Error::TooManyStates(_) => {
                ErrorCategory::Usage
            }
            Error::NonFinite(_) | Error::NotOnSimplex { .. } | Error::NotPositiveDefinite { .. } => {
                ErrorCategory::Numerical
            }
            _ => ErrorCategory::Data,
        }
    }
}
