use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: at least one point is required")]
    EmptyInput,

    #[error("dimension mismatch at row {row}: expected {expected} coordinates, found {found}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid value at row {row}, column {column}: coordinates must be finite")]
    InvalidValue { row: usize, column: usize },

    #[error("duplicate point: row {duplicate} repeats row {original}")]
    DuplicatePoint { original: usize, duplicate: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("oracle refused instance with {n} vertices (cap {cap})")]
    OracleSize { n: usize, cap: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Process exit code for the CLI: 2 for input problems, 3 for bad parameters.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::OracleSize { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
