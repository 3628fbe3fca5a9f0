use std::path::PathBuf;
use std::sync::Arc;

/// Errors produced by the engine and the evaluation harness.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("date {date} is outside the grid span {begin}..={end}")]
    OutOfRange {
        date: chrono::NaiveDate,
        begin: chrono::NaiveDate,
        end: chrono::NaiveDate,
    },

    #[error("empty candidate set{}", .0.as_deref().map(|q| format!(" for query {q:?}")).unwrap_or_default())]
    EmptyCandidates(Option<String>),

    #[error("unknown algorithm {name:?}; valid names: {}", valid.join(", "))]
    UnknownAlgorithm { name: String, valid: Vec<&'static str> },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: Arc<std::io::Error>,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source: Arc::new(source),
        }
    }

    /// Whether the error stems from bad input (as opposed to a runtime failure).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Parse { .. }
                | Error::OutOfRange { .. }
                | Error::UnknownAlgorithm { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
