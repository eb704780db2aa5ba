use thiserror::Error;

/// Errors raised by the hunting model, strategies and analysis routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Exact integer arithmetic left the representable range.
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("time steps and enumeration indices start at 1")]
    ZeroIndex,

    #[error("unsupported enumeration dimension {0} (expected 2, 3 or 4)")]
    UnsupportedDimension(usize),

    #[error("guess {guess} is not in the target space of a {model} rabbit")]
    TargetMismatch { model: &'static str, guess: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown envelope `{0}`")]
    UnknownEnvelope(String),
}

impl Error {
    /// True for failures of exact arithmetic, as opposed to bad input.
    pub fn is_arithmetic(&self) -> bool {
        matches!(self, Error::Overflow(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
