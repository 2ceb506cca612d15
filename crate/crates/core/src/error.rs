use thiserror::Error;

use crate::moments::MomentBase;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("moment ({i}, {j}) violates parity requirement: {expected}")]
    Parity {
        i: u32,
        j: u32,
        expected: &'static str,
    },

    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("integrator exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("conservation residual {residual:e} exceeds {limit:e} at theta = {theta}")]
    Conservation {
        theta: f64,
        residual: f64,
        limit: f64,
    },

    #[error("quadrature did not converge: error estimate {error:e} above tolerance {tol:e}")]
    Quadrature { error: f64, tol: f64 },

    #[error("cannot add moments over different bases {0:?} and {1:?}")]
    BaseMismatch(MomentBase, MomentBase),

    #[error(
        "orbit-equation denominator fell to {min:.4} (< 1/2) at theta = {theta:.4}; \
         rho = {rho} is too large, use rho below about {rho_max:.3}"
    )]
    Denominator {
        rho: f64,
        theta: f64,
        min: f64,
        rho_max: f64,
    },

    #[error("trajectory left the disc of radius {bound} at t = {t}")]
    BlowUp { t: f64, bound: f64 },

    #[error("no section crossing found before t = {t_end}")]
    NoCrossing { t_end: f64 },

    #[error("regime mismatch: {0}")]
    Regime(String),

    #[error("cannot parse {0:?} as a rational or decimal number")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
