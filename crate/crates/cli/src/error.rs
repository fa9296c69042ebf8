use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, unreadable inputs, invalid files.
    #[error("{0}")]
    Validation(String),
    /// Inputs disagree with each other (unknown story ids, missing references or scores).
    #[error("{0}")]
    DataMismatch(String),
    #[error("model server unreachable: {0}")]
    Backend(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::DataMismatch(_) => 3,
            CliError::Backend(_) => 4,
            CliError::Failed(_) => 1,
        }
    }

    pub fn io(what: &str, path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{what} {}: {err}", path.display()))
    }
}
