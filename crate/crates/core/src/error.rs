use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of the routine.
    #[error("domain error in {routine}: {message}")]
    Domain { routine: &'static str, message: String },

    /// An adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature for {context} did not converge: {message}")]
    Quadrature { context: String, message: String },

    /// A running reduction left the representable range.
    #[error("overflow in {routine}: {message}")]
    Overflow { routine: &'static str, message: String },

    /// A matrix factorization or eigenvalue computation failed.
    #[error("linear algebra failure in {routine}: {message}")]
    Linalg { routine: &'static str, message: String },

    /// Configuration or I/O problems surfaced by the CLI layer.
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn domain(routine: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { routine, message: message.into() }
    }

    pub fn overflow(routine: &'static str, message: impl Into<String>) -> Self {
        Error::Overflow { routine, message: message.into() }
    }

    pub fn linalg(routine: &'static str, message: impl Into<String>) -> Self {
        Error::Linalg { routine, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
