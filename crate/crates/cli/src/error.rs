use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

/// Problems reading the input table.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("data file {0} does not exist")]
    MissingFile(PathBuf),
    #[error("column `{0}` not found in the header")]
    MissingColumn(String),
    /// `row` is the 1-based data row (the header is row 0).
    #[error("row {row}, column `{column}`: `{value}` is not a number")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("row {row}: response must be positive, got {value}")]
    NonPositiveResponse { row: usize, value: f64 },
    #[error("malformed CSV: {0}")]
    Malformed(String),
    #[error("data file has no rows")]
    Empty,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
    /// Estimation, convergence or feasibility failure.
    #[error("{context}: {source}")]
    Compute { context: String, source: gammareg::Error },
}

impl CliError {
    pub fn compute(context: impl Into<String>, source: gammareg::Error) -> Self {
        CliError::Compute { context: context.into(), source }
    }

    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        CliError::Io { path: path.into(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute { .. } => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Ingest(_) => "ingestion",
            CliError::Io { .. } => "io",
            CliError::Compute { .. } => "compute",
        }
    }

    /// One-line machine-readable form for stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::Ingest(IngestError::NonNumeric { row, column, .. }) => {
                v["row"] = json!(row);
                v["column"] = json!(column);
            }
            CliError::Ingest(IngestError::NonPositiveResponse { row, .. }) => v["row"] = json!(row),
            CliError::Ingest(IngestError::MissingColumn(c)) => v["column"] = json!(c),
            _ => {}
        }
        v
    }
}
