use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("numeric error: {msg} (residual {residual:.3e})")]
    Numeric { msg: String, residual: f64 },
    #[error("truncation error: {msg} (achieved bound {bound:.3e})")]
    Truncation { msg: String, bound: f64 },
    #[error("ill-conditioned system: condition number ~ 1e{log10_cond:.1}")]
    IllConditioned { log10_cond: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric { msg: msg.into(), residual }
    }

    pub fn truncation(msg: impl Into<String>, bound: f64) -> Self {
        Error::Truncation { msg: msg.into(), bound }
    }
}
