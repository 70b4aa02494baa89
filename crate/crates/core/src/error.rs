//! Error type shared by all solver components.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("non-finite field: {context}")]
    NonFiniteField { context: String },

    #[error("invalid exponent: p = {p} (need p >= 1 or p = inf)")]
    InvalidExponent { p: f64 },

    #[error("negative gradient-square: sigma = {sigma}")]
    NegativeGradientSquare { sigma: f64 },

    #[error("no derivative: tabulated limiters do not provide one")]
    NoDerivative,

    #[error("positivity violated: min({field}) = {min:e} is below -{tol:e}")]
    PositivityViolated {
        field: &'static str,
        min: f64,
        tol: f64,
    },

    #[error("negative input: {context}")]
    NegativeInput { context: String },

    #[error("viscous CFL: dt = {dt:e} exceeds the explicit limit {limit:e}")]
    ViscousCfl { dt: f64, limit: f64 },

    #[error("poisson diverged: residual {residual:e} after {iterations} iterations")]
    PoissonDiverged { iterations: usize, residual: f64 },

    #[error("blow-up suspected: max|n| = {linf_n:e} exceeded guard {guard:e} at t = {t}")]
    BlowUpSuspected { linf_n: f64, guard: f64, t: f64 },

    #[error("monitor violated: {check} at t = {t} (slack {slack:e})")]
    MonitorViolated { check: String, t: f64, slack: f64 },

    #[error("records not time-sorted at index {index}")]
    RecordsNotSorted { index: usize },

    #[error("grid mismatch: {context}")]
    GridMismatch { context: String },

    #[error("invalid grid: {context}")]
    InvalidGrid { context: String },

    #[error("invalid limiter table: {context}")]
    InvalidLimiterTable { context: String },

    #[error("invalid error table: {context}")]
    InvalidErrorTable { context: String },

    #[error("unknown case id: {id}")]
    UnknownCase { id: String },

    #[error("invalid argument: {context}")]
    InvalidArgument { context: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;
