use thiserror::Error;

use crate::dataset::Violation;
use crate::numeric::{NumericError, ParseRationalError};

#[derive(Debug, Error)]
pub enum Error {
    /// The caller handed over something malformed. The CLI maps this to exit code 2.
    #[error("invalid input: {0}")]
    Input(String),
    #[error("dataset failed validation:\n{}", render_violations(.0))]
    Validation(Vec<Violation>),
    #[error("malformed number: {0}")]
    Number(#[from] ParseRationalError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    /// A computed certificate failed its own replay.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}

fn render_violations(vs: &[Violation]) -> String {
    vs.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
