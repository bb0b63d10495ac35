use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {what} (residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    #[error("rate {rate} exceeds the largest mutual information reachable at rho = {rho_floor}")]
    UnboundedBracket { rate: f64, rho_floor: f64 },

    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    Quadrature { achieved: f64 },

    #[error("enumeration ceiling of {ceiling} states exceeded")]
    EnumerationCeiling { ceiling: u64 },

    #[error("empty feasible set: {0}")]
    EmptyFeasibleSet(String),

    #[error("constraint violation: {what} = {value} exceeds {limit}")]
    ConstraintViolation { what: String, value: f64, limit: f64 },

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("n too small for slack formulas: n = {n}, formulas valid from n = {n_min}")]
    SlackPrecondition { n: u64, n_min: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("codebook size {m} exceeds the cap of {cap} codewords")]
    CapExceeded { m: f64, cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
