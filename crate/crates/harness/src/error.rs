use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] balancelab_core::Error),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    /// 1 for configuration and I/O problems, 2 for numerical failures, 3 for invariant violations.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io { .. } => 1,
            Self::Invariant(_) => 3,
            Self::Core(e) if e.is_invariant() => 3,
            Self::Core(e) if e.is_numerical() => 2,
            Self::Core(_) => 1,
        }
    }
}
