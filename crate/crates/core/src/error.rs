use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("instance too large for exact search: {0}")]
    TooLarge(String),

    #[error(
        "tie-breaking rule for player J{player} returned M{machine}, which is not a tied candidate"
    )]
    RuleViolation { player: usize, machine: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
