use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("Mandel Q is undefined for a state with zero mean photon number")]
    UndefinedQ,

    #[error("oracle refuses instance: {0}")]
    OracleGuard(String),

    #[error("degenerate experiment: mean total count is zero")]
    DegenerateExperiment,

    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl Error {
    /// Process exit status: 2 for bad input, 3 for numerical trouble, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) | Error::UndefinedQ | Error::OracleGuard(_) => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}
