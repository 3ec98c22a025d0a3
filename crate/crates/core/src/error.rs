use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("invalid sampling pattern: {0}")]
    Pattern(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("iteration diverged at iteration {iteration} (tau = {tau:e}, sigma = {sigma:e}); reduce the step sizes")]
    Diverged { iteration: usize, tau: f64, sigma: f64 },

    #[error("did not converge within {iterations} iterations (last gap {last_gap:e})")]
    NotConverged { iterations: usize, last_gap: f64 },
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
