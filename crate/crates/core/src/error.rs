use thiserror::Error;

/// Errors raised by the tierwave engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("lognormal sum needs at least one term")]
    EmptySum,

    #[error("{0} is only defined for alpha_f = 4 (got {1})")]
    RequiresAlphaFour(&'static str, f64),

    #[error("degenerate allocation input: {0}")]
    Degenerate(String),

    #[error("empty feasible set: {0}")]
    Infeasible(String),

    #[error("root finding failed: {0}")]
    NoRoot(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
