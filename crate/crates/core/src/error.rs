use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid alignment: {0}")]
    Alignment(String),

    #[error("grid too coarse: {0}")]
    TooCoarse(String),

    #[error("expression is singular at node {node:?}")]
    Singular { node: Vec<f64> },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("support: {0}")]
    Support(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown corpus entry `{0}`")]
    UnknownEntry(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
