use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("r = {r} lies outside the domain ({r_min}, {r_max})")]
    OutOfDomain { r: f64, r_min: f64, r_max: f64 },

    #[error("integrand is not finite at r = {r} (value {value})")]
    NonFinite { r: f64, value: f64 },

    #[error("support [{support_lo}, {support_hi}] leaks outside grid [{grid_lo}, {grid_hi}]")]
    SupportLeak {
        support_lo: f64,
        support_hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("field is not certified: {0}")]
    NotCertified(String),

    #[error("normalization collapsed: {0}")]
    DegenerateNormalization(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
