use thiserror::Error;

/// Errors surfaced by learners, generators, and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The predict/update protocol was violated (e.g. two predicts in a row).
    #[error("protocol error: {0}")]
    Protocol(String),

    /// A configuration file or parameter set failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// A trace is missing fields required by the requested evaluator, or a
    /// trace file failed to parse.
    #[error("trace error: {0}")]
    Trace(String),

    /// A runtime invariant (feasibility, bookkeeping consistency) was
    /// violated during a run.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
