use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("flip probability {0} is outside the open interval (0, 0.5)")]
    InvalidFlipProbability(f64),

    #[error("age of information must be at least 1 slot")]
    ZeroAge,

    #[error("relative value S(0,1) = {0} must exceed -1")]
    InvalidRelativeValue(f64),

    #[error("relative value iteration did not converge after {iterations} sweeps (span {span:e})")]
    NotConverged { iterations: usize, span: f64 },

    #[error("invalid solver input: {0}")]
    InvalidSolverInput(String),

    #[error("observation reported for channel {0}, which was not transmitted on")]
    UnexpectedObservation(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
