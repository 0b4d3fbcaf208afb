use std::path::PathBuf;

use accessibility_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    /// A document that does not match its schema, located by JSON pointer.
    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn schema(pointer: &str, message: impl Into<String>) -> Self {
        let pointer = if pointer.is_empty() { "/".to_string() } else { pointer.to_string() };
        CliError::Schema { pointer, message: message.into() }
    }

    /// Budget, resolution and undecided-finiteness errors; `--strict` maps these to exit code 2.
    pub fn is_caveat(&self) -> bool {
        matches!(self, CliError::Core(CoreError::Budget(_) | CoreError::Resolution(_) | CoreError::Indeterminate(_)))
    }
}

pub type CliResult<T> = Result<T, CliError>;
