use thiserror::Error;

/// Failures of the special-function layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),
    #[error("overflow in {0}")]
    Overflow(&'static str),
    #[error("domain error: {0}")]
    Domain(&'static str),
}

/// Failures of the quadrature engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("no convergence after {subdivisions} subdivisions (estimate {value:e} ± {error:e})")]
    NoConvergence {
        subdivisions: usize,
        value: f64,
        error: f64,
    },
    #[error("integrand is not integrable at {at}: local exponent {exponent}")]
    NonIntegrable { at: &'static str, exponent: f64 },
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("non-finite integrand value at {0}")]
    NonFinite(f64),
    #[error("invalid quadrature configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Math(#[from] MathError),
}

/// Failures of the operator evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("gradient vanishes at the evaluation point (|grad u| = {0:e}) while p < 2/(2-s)")]
    DegenerateGradient(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unknown test function `{0}`")]
    UnknownFunction(String),
    #[error("representations disagree: {0}")]
    Mismatch(String),
    #[error("extrapolation did not converge: {0}")]
    Extrapolation(String),
    #[error("discrete weights diverge: delta = 0 requires s*p < 2 (s*p = {0})")]
    WeightsDiverge(f64),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Math(#[from] MathError),
}
