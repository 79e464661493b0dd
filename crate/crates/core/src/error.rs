use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file. `line` is 1-based when known.
    #[error("format error in {location}: {message}")]
    Format { location: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("attribute `{0}` is not observed anywhere in the log")]
    NotObserved(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sample of {users} users exceeds the {available} records available")]
    SampleTooLarge { users: usize, available: usize },

    #[error("invalid generator spec: {0}")]
    Spec(String),

    #[error("{} record(s) lack a usable screen resolution (first indices: {:?})", .records.len(), &.records[..records.len().min(10)])]
    MissingResolution { records: Vec<usize> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag used by the CLI diagnostics and the C API.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Domain(_) => "domain",
            Error::NotObserved(_) => "not-observed",
            Error::InsufficientData(_) => "insufficient-data",
            Error::Config(_) => "config",
            Error::SampleTooLarge { .. } => "sample-too-large",
            Error::Spec(_) => "spec",
            Error::MissingResolution { .. } => "missing-resolution",
        }
    }
}
