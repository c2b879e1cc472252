use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Kraus outcome whose trace fell below the impossibility threshold.
    #[error("impossible outcome: probability {0:e} below threshold")]
    ImpossibleOutcome(f64),

    #[error("completeness violated: max deviation {0:e}")]
    Completeness(f64),

    #[error("not a valid monotone spec `{name}`: {reason}")]
    InvalidMonotone { name: String, reason: String },

    #[error("bound undefined: denominator vanishes (target is separable)")]
    SeparableTarget,

    /// Malformed input file; the message carries line and column.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
