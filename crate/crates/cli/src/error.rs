use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid value for `{key}`: allowed {allowed}")]
    Validation { key: String, allowed: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: nmhl_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(key: impl Into<String>, allowed: impl Into<String>) -> Self {
        Self::Validation {
            key: key.into(),
            allowed: allowed.into(),
        }
    }

    /// Wraps a core error with the experiment step that raised it, for use
    /// in `map_err`.
    pub fn core(context: impl Into<String>) -> impl FnOnce(nmhl_core::Error) -> Self {
        let context = context.into();
        move |source| Self::Core { context, source }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    /// The underlying numerical failure, if any.
    pub fn core_error(&self) -> Option<&nmhl_core::Error> {
        match self {
            Self::Core { source, .. } => Some(source),
            _ => None,
        }
    }
}
