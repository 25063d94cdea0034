use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point} is outside a domain of size {domain_size}")]
    DomainMismatch { point: usize, domain_size: usize },

    #[error("hypothesis length {found} does not match domain size {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("domain size {0} is not supported (must be between 1 and 64)")]
    UnsupportedDomain(usize),

    #[error("empirical error of an empty sample is undefined")]
    EmptySample,

    #[error("SOA of an empty class is undefined")]
    UndefinedSoa,

    #[error("duplicate hypothesis {0} in class file")]
    DuplicateHypothesis(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("search budget exceeded ({what}); best known upper bound: {upper_bound:?}")]
    BudgetExceeded {
        what: String,
        upper_bound: Option<i32>,
    },

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("cannot split {available} examples into {parts} non-empty parts")]
    SplitTooSmall { available: usize, parts: usize },

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("sequence is not realizable by the class (class emptied at step {step})")]
    NotRealizable { step: usize },

    #[error("sparse sampling has no outcome to draw from")]
    EmptySupport,

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Budget errors map to a distinct process exit code in the CLI.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::InstanceTooLarge(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
