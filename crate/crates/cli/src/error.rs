use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] shaforge_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("checkpoint {path} is corrupt at line {line}: {reason}")]
    CheckpointCorrupt { path: PathBuf, line: usize, reason: String },

    #[error("checkpoint {path} was written for a different scan: {reason}")]
    CheckpointMismatch { path: PathBuf, reason: String },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
            CliError::CheckpointCorrupt { .. } => "checkpoint-corrupt",
            CliError::CheckpointMismatch { .. } => "checkpoint-mismatch",
            CliError::Usage(_) => "usage",
        }
    }

    /// Process exit status; 2 is left to argument parsing.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" | "parse" => 2,
            "singular-curve" => 3,
            "degenerate-parameters" => 4,
            "unfactored" => 5,
            "budget-exceeded" => 6,
            "apparent-positive-rank" => 7,
            "not-a-square" => 8,
            "class-inconsistent" => 9,
            "bad-reduction" => 10,
            "checkpoint-corrupt" => 11,
            "checkpoint-mismatch" => 12,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
