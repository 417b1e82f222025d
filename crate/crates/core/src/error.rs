use crate::expr::{EvalError, ParseError};

/// Errors raised by model construction, integration and the closed-form pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("mass must be positive, got M({t}) = {value}")]
    NonPositiveMass { t: f64, value: f64 },
    #[error("instantaneous frequency is not positive at t = {t} (omega^2 = {omega_sq})")]
    NonPositiveFrequency { t: f64, omega_sq: f64 },
    #[error("time {t} lies outside the model domain [{t0}, {t1}]")]
    OutOfDomain { t: f64, t0: f64, t1: f64 },
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("maximum number of solver steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: usize },
    #[error("adaptive quadrature failed to converge on [{a}, {b}]")]
    QuadratureNonConvergence { a: f64, b: f64 },
    #[error("invariant constants give non-positive omega_I^2 = {value}")]
    NonPositiveInvariant { value: f64 },
    #[error("invariant coefficient g_minus vanishes or changes sign near t = {t}")]
    VanishingGMinus { t: f64 },
    #[error("covariance matrix is not positive definite (var_q = {var_q}, var_p = {var_p}, cov_qp = {cov_qp})")]
    NotPositiveDefinite { var_q: f64, var_p: f64, cov_qp: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
