use thiserror::Error;

/// Errors raised by model construction, assembly, factorization and the
/// experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {value} outside domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("singular matrix in {context} (pivot {pivot})")]
    Singular { context: String, pivot: usize },

    #[error("mode {ell} (lambda = {lambda}) hits a discrete resonance of the exterior problem")]
    ModeResonance { ell: usize, lambda: f64 },

    #[error("resonance: {0}")]
    Resonance(String),

    #[error("kernel pole at x = {0}")]
    KernelPole(f64),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn config(key: &str, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            msg: msg.into(),
        }
    }
}
