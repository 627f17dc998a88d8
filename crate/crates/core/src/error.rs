use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("non-uniform spacing at row {row}: expected step {expected}, found {found}")]
    Spacing {
        row: usize,
        expected: f64,
        found: f64,
    },

    #[error("size error: {0}")]
    Size(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Nyquist error: {0}")]
    Nyquist(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// I/O failures are the only errors that are not caused by invalid input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
