use thiserror::Error;

/// Failures that end a command with exit status 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Input { field: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
    #[error(transparent)]
    Core(#[from] histories_core::Error),
}

impl CliError {
    pub fn input(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Input {
            field: field.into(),
            message: message.into(),
        }
    }
}
