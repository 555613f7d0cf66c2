use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {what} (achieved {achieved:.3e})")]
    Numerical { what: String, achieved: f64 },
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
