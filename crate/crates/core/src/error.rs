use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed user-supplied input (probability rows, configs, indices).
    #[error("validation error: {0}")]
    Validation(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("planner error: {0}")]
    Planner(String),

    /// An observation with zero likelihood under every model in the belief.
    #[error("impossible observation: {0}")]
    ImpossibleObservation(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("config error: {0}")]
    Config(String),

    /// A run aborted partway through.
    #[error("run failed at step {step}: {source}")]
    RunFailed {
        step: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn planner(msg: impl Into<String>) -> Self {
        Error::Planner(msg.into())
    }

    pub(crate) fn at_step(self, step: u64) -> Self {
        Error::RunFailed {
            step,
            source: Box::new(self),
        }
    }
}
