use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Core(#[from] dumbbell_core::Error),
    #[error("{0}")]
    Usage(String),
    /// An invariant check failed; outputs were still written.
    #[error("check failed: {}", .0.join("; "))]
    CheckFailed(Vec<String>),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 when a check failed, 1 for operational errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::CheckFailed(_) => 2,
            _ => 1,
        }
    }
}
