use thiserror::Error;

/// Errors surfaced by strategy validation and the numeric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pool size {size} at stage {stage} is smaller than 2")]
    PoolTooSmall { stage: usize, size: i64 },

    #[error("pool sizes must be strictly decreasing, got {prev} followed by {next}")]
    NotDecreasing { prev: i64, next: i64 },

    #[error("pool size {larger} is not an integer multiple of the next pool size {smaller}")]
    NonDivisible { larger: i64, smaller: i64 },

    #[error("strategy has no pooled stages")]
    EmptyStrategy,

    #[error("Dorfman pool size must be at least 2, got {0}")]
    InvalidPoolSize(i64),

    #[error("pool-size chain overflows the 64-bit range at k = {0}")]
    Overflow(u32),

    #[error("{value} is outside the valid range: {context}")]
    OutOfRange { value: f64, context: &'static str },

    #[error("no sign change on bracket [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("population length {got} does not match the first pool size {expected}")]
    LengthMismatch { got: usize, expected: i64 },

    #[error("exact enumeration supports first pools up to {max}, got {got}")]
    TooLarge { got: i64, max: i64 },

    #[error("invalid real-valued pool vector: {0}")]
    InvalidPools(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
