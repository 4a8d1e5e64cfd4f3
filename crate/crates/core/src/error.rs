use thiserror::Error;

/// Errors raised by the series, transform and solver layers.
///
/// The CLI maps the first group (bad input) to exit code 2 and the
/// numerical group to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index outside truncation: {0}")]
    Truncation(String),
    #[error("series is not O(x): {0}")]
    NotOrderX(String),
    #[error("non-resonance condition violated: {0}")]
    NonResonance(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("did not converge: {0}")]
    NotConverged(String),
}

impl Error {
    /// True for errors caused by malformed or inconsistent input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::Dimension(_)
                | Error::Truncation(_)
                | Error::NotOrderX(_)
                | Error::NonResonance(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
