use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("diagonal quadratic term ({0}, {0}) is not allowed; use a linear term")]
    DiagonalTerm(usize),

    #[error("spin value {0} is not in {{-1, +1}}")]
    SpinDomain(i8),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("{n} variables exceed the enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("undefined value: {0}")]
    Undefined(String),

    #[error("missing state: {0}")]
    State(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
