use thiserror::Error;

/// Errors raised by the numeric kernels and the configuration loader.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("atomic point: density undefined at atom location {0}")]
    AtomicPoint(f64),

    #[error("no convergence in {what} after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("mass deficit: recovered mass {mass} (grid misses part of the support)")]
    MassDeficit { mass: f64 },

    #[error("domain mismatch: evaluation domains are disjoint")]
    DomainMismatch,

    #[error("horizon exceeded: t = {t} beyond driver horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("not in image: round-trip residual {residual}")]
    NotInImage { residual: f64 },

    #[error("trace unresolved at t = {t}: boundary limit does not contract")]
    TraceUnresolved { t: f64 },

    #[error("not a slit: {0}")]
    NotASlit(String),

    #[error("unstable fit: variance estimates {estimates:?} disagree by more than 1%")]
    UnstableFit { estimates: Vec<f64> },

    #[error("quadrature failure: adaptive refinement exceeded depth {depth}")]
    QuadratureFailure { depth: usize },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

impl Error {
    /// True for failures of a numeric procedure (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        !matches!(self, Error::Invalid(_) | Error::Schema { .. } | Error::AtomicPoint(_))
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
