use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported derivative order {0}")]
    UnsupportedOrder(String),
    #[error("fundamental solution evaluated at its singularity x = 0")]
    Singularity,
    #[error("quadrature did not converge: estimated error {estimate:.3e} exceeds target {target:.3e}")]
    Accuracy { estimate: f64, target: f64 },
    #[error("invalid parameter `{field}`: {reason}")]
    Param { field: &'static str, reason: String },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("alpha = 1 - 1/p is the excluded borderline exponent (alpha = {alpha}, p = {p})")]
    ExcludedExponent { alpha: f64, p: f64 },
    #[error("time {0} lies outside the sampled time grid")]
    OutsideGrid(f64),
    #[error("malformed data: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Param {
            field,
            reason: reason.into(),
        }
    }
}
