use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the set where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value lies outside the range on which an inverse is available.
    #[error("range error: {0}")]
    Range(String),

    /// Caller supplied inconsistent sizes or an empty input.
    #[error("usage error: {0}")]
    Usage(String),

    /// A model could not be built from its parameters.
    #[error("construction error: {0}")]
    Construction(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Configuration problem; the CLI maps this to exit code 2.
    #[error("configuration error: {0}")]
    Config(String),

    /// The Poisson cloud is truncated below what the requested functional needs.
    #[error("truncation bias: {0}")]
    TruncationBias(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
