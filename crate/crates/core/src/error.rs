use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by the phase-space engine and the Fock oracle.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The covariance matrix violates the uncertainty relation (or is not positive definite).
    #[error("invalid covariance matrix: minimum symplectic eigenvalue {nu_min:.6e} below 1 (asymmetry {asymmetry:.2e})")]
    InvalidState { nu_min: f64, asymmetry: f64 },

    /// A numerical precondition of an operation was not met. `flag` names it.
    #[error("precondition `{flag}` violated: {detail}")]
    Precondition { flag: &'static str, detail: String },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("unknown model family `{0}`")]
    UnknownFamily(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn precondition(flag: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            flag,
            detail: detail.into(),
        }
    }

    /// True for rejections caused by the numbers rather than by malformed input:
    /// invalid states, failed preconditions, domain violations and solver failures.
    pub fn is_numerical_rejection(&self) -> bool {
        matches!(
            self,
            Error::InvalidState { .. }
                | Error::Precondition { .. }
                | Error::Domain(_)
                | Error::Numerical(_)
        )
    }
}
