use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value for {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("control {u} is not admissible: |u| must not exceed rho = {rho}")]
    Inadmissible { u: f64, rho: f64 },

    #[error("numeric range exceeded: {0}")]
    Range(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("Lie algebra rank condition fails: {0}")]
    Larc(String),

    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("not found: {0}")]
    NotFound(String),
}

pub(crate) fn ensure_finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}
