use thiserror::Error;

#[derive(Debug, Error)]
pub enum HonError {
    #[error("malformed line {0}: entity contains a reserved character ('|', ',') ")]
    MalformedLine(usize),
    #[error("input contains no trajectories")]
    EmptyInput,
    #[error("KL divergence undefined: P has mass where Q is zero")]
    SupportViolation,
    #[error("rule set violates prefix closure: prefix of {0:?} is missing")]
    DanglingPrefix(String),
    #[error("entity {0:?} never appeared in training data")]
    UnknownEntity(String),
    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("score maps cover different entity universes")]
    UniverseMismatch,
    #[error("cannot place the requested injected rules without conflicts")]
    InfeasibleConfig,
    #[error("no test trajectories longer than the holdout length")]
    EmptyTestSet,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HonError>;
