use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target assigns mass {mass} to atom {index}, which has zero prior mass")]
    AbsoluteContinuityViolation { index: usize, mass: f64 },

    #[error("block level support of {levels} exceeds the cap of {cap}")]
    BlockTooLarge { levels: usize, cap: usize },

    #[error("exact-by-symmetry mode requires a y-symmetric channel")]
    SymmetryRequired,

    #[error("channel is singular (zero conditional log-likelihood variance)")]
    SingularChannel,

    #[error("argmin not certified within {budget} proposals")]
    ProposalBudgetExceeded { budget: u64 },

    #[error("likelihood ratio vanishes on the whole prior support for y = {y}")]
    EmptySupport { y: usize },

    #[error("set has zero prior probability")]
    EmptySet,

    #[error("radius {radius} outside the derivative range ({lo}, {hi})")]
    RadiusOutOfRange { radius: f64, lo: f64, hi: f64 },

    #[error("epsilon {epsilon} violates the operating-interval conditions: {reason}")]
    InvalidEpsilon { epsilon: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
