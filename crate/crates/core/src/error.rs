use std::path::PathBuf;

use thiserror::Error;

/// Every failure the toolkit reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("schema mismatch: missing columns [{}]", .missing.join(", "))]
    SchemaMismatch { missing: Vec<String> },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("column `{0}` has no observed values")]
    EmptyColumn(String),

    #[error("unseen category `{value}` in column `{column}`")]
    UnseenCategory { column: String, value: String },

    #[error("cannot take log of {value} (row {row}, column `{column}`)")]
    NonPositiveLog { row: usize, column: String, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training diverged (non-finite loss) with learning rate {learning_rate}")]
    Diverged { learning_rate: f64 },

    #[error("solver did not converge: final KKT violation {violation:.3e}")]
    Convergence { violation: f64 },

    #[error("model family `{0}` is not supported here")]
    UnsupportedFamily(String),

    #[error("bundle error: {0}")]
    Bundle(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI's one-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingFile(_) => "missing_file",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Config(_) => "config",
            Error::SchemaMismatch { .. } => "schema_mismatch",
            Error::UnknownColumn(_) => "unknown_column",
            Error::EmptyColumn(_) => "empty_column",
            Error::UnseenCategory { .. } => "unseen_category",
            Error::NonPositiveLog { .. } => "non_positive_log",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Diverged { .. } => "diverged",
            Error::Convergence { .. } => "convergence",
            Error::UnsupportedFamily(_) => "unsupported_family",
            Error::Bundle(_) => "bundle",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
