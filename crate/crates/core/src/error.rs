use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: expected {expected}, found {found}")]
    Shape {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("treatment arm {arm} is absent from the {domain} training split")]
    MissingArm { arm: u8, domain: &'static str },

    #[error("model has not been trained")]
    Untrained,

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape_err<T>(op: &'static str, expected: impl ToString, found: impl ToString) -> Result<T> {
    Err(Error::Shape {
        op,
        expected: expected.to_string(),
        found: found.to_string(),
    })
}
