use std::path::PathBuf;

/// Errors raised by the simulator and its building blocks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric parameter is outside its admissible domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// Vector or matrix dimensions do not agree.
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Channel estimation could not be carried out (degenerate pilot).
    #[error("channel estimation failed: {0}")]
    Estimation(String),

    /// The experiment configuration is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed results file: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::ParameterDomain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn shape(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Shape {
            context,
            expected,
            actual,
        }
    }

    /// True for errors caused by the user's configuration rather than the run itself.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::ParameterDomain(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
