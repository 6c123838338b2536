use std::path::PathBuf;

use casimir_polder::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}:{line}: {reason}", file.display())]
    Config { file: PathBuf, line: usize, reason: String },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} verification checks failed")]
    Verification(usize),
}

impl CliError {
    /// 1 usage or input, 2 numerical non-convergence, 3 failed verification.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Convergence { .. } | Error::Overflow(_) | Error::Consistency(_)) => 2,
            CliError::Verification(_) => 3,
            _ => 1,
        }
    }
}
