//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An exact integer computation exceeded 128 bits.
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    /// A randomized construction failed its genericity predicates within
    /// the retry budget.
    #[error("resampling budget exhausted after {attempts} attempts (seed {seed}): {what}")]
    ResamplingFailed {
        what: String,
        seed: u64,
        attempts: u32,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
