use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex set meets both parity classes")]
    MixedSide,
    #[error("dimension {d} is outside the supported range (max {max})")]
    DimensionTooLarge { d: u32, max: u32 },
    #[error("budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("vertex set is not independent: {0} ~ {1}")]
    NotIndependent(u64, u64),
    #[error("lambda must be positive")]
    NonpositiveLambda,
    #[error("regime {0} has no estimate")]
    UnknownRegime(String),
    #[error("no admissible m: {0}")]
    MSolveFailure(String),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("vertex {0} has no neighbour in the candidate side")]
    Uncoverable(usize),
    #[error("no admissible random draw after {0} attempts")]
    RetryExhausted(u32),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
