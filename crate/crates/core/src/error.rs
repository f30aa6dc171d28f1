use std::path::PathBuf;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate variable: {0}")]
    DegenerateVariable(String),

    #[error("non-finite value in {context}")]
    Numeric { context: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("network error: {0}")]
    Network(String),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numeric(context: impl Into<String>) -> Self {
        Error::Numeric {
            context: context.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn for_column(self, name: &str) -> Self {
        match self {
            Error::DegenerateVariable(m) => Error::DegenerateVariable(format!("column {name}: {m}")),
            other => other,
        }
    }

    /// Short machine-readable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Argument(_) => "argument",
            Error::DegenerateVariable(_) => "degenerate_variable",
            Error::Numeric { .. } => "numeric",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Network(_) => "network",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
