use thiserror::Error;

/// Errors raised by the numerical layers of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QslError {
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge at t = {t}: {reason}")]
    Quadrature { t: f64, reason: String },

    #[error("coherence factor {value} at t = {t} lies outside [-1, 1]")]
    CoherenceOutOfRange { t: f64, value: f64 },

    #[error("filter normalization vanishes (trace = {0:e})")]
    DegenerateFilter(f64),

    #[error("time {t} outside the tabulated range [0, {t_max}]")]
    OutOfTable { t: f64, t_max: f64 },

    #[error("sweep row failed at k = {k}, tau = {tau}: {source}")]
    SweepRow { k: f64, tau: f64, source: Box<QslError> },

    #[error("Monte-Carlo standard error {std_error:e} exceeds requested tolerance {tolerance:e} (n = {n})")]
    Unresolved { std_error: f64, tolerance: f64, n: usize },
}

pub type Result<T> = std::result::Result<T, QslError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> QslError {
    QslError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
