//! Crate-wide error type.
//!
//! Failures carry enough context to act on: non-convergent quadrature keeps
//! its best estimate, a rejected bracket reports both endpoint values, and
//! validation errors name the offending entry.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("quadrature did not reach tol: best estimate {value:e} with error estimate {error_estimate:e} after {evaluations} evaluations")]
    QuadratureNoConvergence {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("sign scan over [{lo}, {hi}] step {step} found no bracket; scan table: {table:?}")]
    ScanFailed {
        lo: f64,
        hi: f64,
        step: f64,
        table: Vec<(f64, f64)>,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("predicted atom count {predicted} exceeds cap {cap}; use the Monte-Carlo method for this row")]
    AtomCapExceeded { predicted: usize, cap: usize },

    #[error("alpha = {alpha} lies outside (0, 1/2]: row n = {n}, entry k = {k} would receive a negative probability")]
    AlphaOutOfRange { alpha: f64, n: usize, k: usize },

    #[error("invalid array spec: {0}")]
    InvalidArraySpec(String),

    #[error("epsilon = {0} must be positive: the truncation level enters as a strict threshold and the limit epsilon -> 0 is taken over positive values only")]
    NonPositiveEpsilon(f64),

    #[error("invalid weight function: {0}")]
    InvalidWeight(String),

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cross-check '{name}' failed: residual {residual:e} exceeds tolerance {tolerance:e}")]
    CheckFailed {
        name: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("malformed input at {field}: {reason}")]
    Malformed { field: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
