use thiserror::Error;

/// Errors produced by the certification library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("outcome has vanishing probability ({probability:e})")]
    ZeroProbabilityOutcome { probability: f64 },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("particle filter impoverished: total likelihood {total_likelihood:e}")]
    Impoverished { total_likelihood: f64 },

    #[error("divergence undefined: particle {index} has zero prior weight but positive posterior weight")]
    UndefinedDivergence { index: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
