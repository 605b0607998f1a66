use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to
/// be reported directly to a user.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid q sample {0}: q must not be 0, 1 or -1")]
    InvalidQ(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),

    #[error("p-adic context mismatch: {0} vs {1}")]
    ContextMismatch(String, String),

    #[error("p-adic division by zero")]
    DivisionByZero,

    #[error("p-adic domain violation: {0}")]
    Domain(String),

    #[error("series variable mismatch: {0} vs {1}")]
    VariableMismatch(char, char),

    #[error("series is not invertible: constant term is zero")]
    NotInvertible,

    #[error("insufficient series order: need at least {needed}, got {got}")]
    InsufficientOrder { needed: usize, got: usize },

    #[error("nonvanishing pole coefficient at u^-{power}: {coefficient}")]
    NonvanishingPole { power: usize, coefficient: String },

    #[error("unknown identity {0:?}")]
    UnknownIdentity(String),

    #[error("level-sum budget exceeded: {points} points > {budget}")]
    BudgetExceeded { points: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
