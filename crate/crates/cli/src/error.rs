use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {msg}")]
    Validation { path: String, msg: String },

    #[error("solver failed: {0}")]
    Solver(#[from] coarse_core::Error),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn validation(path: impl Into<String>, msg: impl ToString) -> Self {
        CliError::Validation { path: path.into(), msg: msg.to_string() }
    }

    /// Process exit code: 2 validation, 3 solver, 4 certification, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Certification(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
