use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge after {subdivisions} subdivisions (best {best}, error estimate {abs_error})")]
    Convergence {
        best: f64,
        abs_error: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite value at x = {x}")]
    Integrand { x: f64 },
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Domain(_) => "domain",
            Self::Convergence { .. } => "convergence",
            Self::Integrand { .. } => "integrand",
            Self::Divergent(_) => "divergent",
            Self::Input(_) => "input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
