use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine failed to reach its tolerance.
    #[error("numeric failure: {message}")]
    Numeric {
        message: String,
        best_estimate: Option<f64>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, best_estimate: Option<f64>) -> Self {
        Error::Numeric {
            message: msg.into(),
            best_estimate,
        }
    }
}
