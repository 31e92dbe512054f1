//! Crate-wide error type and exit-code mapping.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AgcnError>;

#[derive(Debug, Error)]
pub enum AgcnError {
    /// Incompatible matrix/graph dimensions. Carries both shapes so the
    /// message is actionable without a debugger.
    #[error("dimension mismatch in {op}: {lhs} vs {rhs}")]
    ShapeMismatch {
        op: &'static str,
        lhs: String,
        rhs: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Mathematically degenerate input (zero row to a normalizer, empty
    /// target-distribution column, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A file failed to parse; carries the 1-based line number.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Cross-file consistency failure (row-count mismatch, bad node id, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// NaN/Inf encountered where finite values are required.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl AgcnError {
    /// Process exit code for the CLI: 1 usage, 2 data validation, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            AgcnError::Numerical(_) => 3,
            AgcnError::InvalidArgument(_) => 1,
            _ => 2,
        }
    }
}
