use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("interval endpoints out of order: lower {lower} > upper {upper}")]
    Ordering { lower: f64, upper: f64 },

    #[error("infeasible with n = {n}: at least {min_n} observations are required")]
    Infeasible { n: usize, min_n: usize },

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("sampler initialization failed: {0}")]
    Initialization(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_probability(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must lie in (0, 1), got {p}")))
    }
}

pub(crate) fn ensure_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must be positive and finite, got {x}")))
    }
}
