use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A lemma or theorem hypothesis does not hold for the given input.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A fiber map broke `f(0) = 0` or `0 <= f <= a` on the sampling grid.
    #[error("fiber map invariant violated: {0}")]
    Invariant(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("cannot represent base point: {0}")]
    Representation(String),

    #[error("graph does not cover base point {0}")]
    Coverage(String),

    /// The system lacks a capability the operation needs (e.g. invertibility).
    #[error("unsupported: {0}")]
    Capability(String),

    #[error("trace carries no bound records")]
    MissingBounds,

    #[error("unknown or invalid registry entry: {0}")]
    Registry(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
