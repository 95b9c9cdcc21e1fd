use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad selectors, config file or arguments.
    #[error("{0}")]
    Config(String),
    /// Unreadable or corrupt interaction log, or a failed adaptation.
    #[error("{0}")]
    Data(String),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Output { .. } => 1,
        }
    }
}
