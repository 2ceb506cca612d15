//! Lyapunov's generalized trigonometric functions.
//!
//! `(Cs, Sn)` solve `x' = -y^(2p-1)`, `y' = x^(2q-1)` with `x(0) = (1/p)^(1/2q)`,
//! `y(0) = 0`. Downstream code always uses `p = 1`, `q = l`, for which the
//! conservation law reads `Cs^(2l) + l Sn^2 = 1`.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, DenseStep, Options};
use crate::special::gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigState {
    pub theta: f64,
    pub cs: f64,
    pub sn: f64,
}

/// Closed-form period of `(Cs, Sn)` for exponents `(p, q)`.
pub fn period(p: u32, q: u32) -> Result<f64> {
    if p == 0 || q == 0 {
        return Err(Error::Domain(format!("period needs p, q >= 1 (got p = {p}, q = {q})")));
    }
    let (p, q) = (p as f64, q as f64);
    let a = 1.0 / (2.0 * p);
    let b = 1.0 / (2.0 * q);
    Ok(2.0 * p.powf(-b) * q.powf(-a) * gamma(a) * gamma(b) / gamma(a + b))
}

/// `p Cs^(2q) + q Sn^(2p) - 1`.
pub fn residual_pq(p: u32, q: u32, cs: f64, sn: f64) -> f64 {
    p as f64 * cs.powi(2 * q as i32) + q as f64 * sn.powi(2 * p as i32) - 1.0
}

pub fn residual(l: u32, cs: f64, sn: f64) -> f64 {
    residual_pq(1, l, cs, sn)
}

fn rhs(p: u32, q: u32) -> impl Fn(f64, &[f64; 2], &mut [f64; 2]) {
    let ep = 2 * p as i32 - 1;
    let eq = 2 * q as i32 - 1;
    move |_, y, d| {
        d[0] = -y[1].powi(ep);
        d[1] = y[0].powi(eq);
    }
}

fn initial(p: u32, q: u32) -> [f64; 2] {
    [(1.0 / p as f64).powf(1.0 / (2.0 * q as f64)), 0.0]
}

fn integrate_once(p: u32, q: u32, theta: f64, tol: f64, limit: f64) -> Result<[f64; 2]> {
    let mut violation = None;
    let out = ode::solve(
        rhs(p, q),
        0.0,
        initial(p, q),
        theta,
        &Options::with_tol(tol),
        |step: &DenseStep<2>| {
            let r = residual_pq(p, q, step.y1[0], step.y1[1]).abs();
            if r > limit {
                violation = Some(Error::Conservation { theta: step.t1(), residual: r, limit });
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    )?;
    match violation {
        Some(e) => Err(e),
        None => Ok(out.y),
    }
}

/// Evaluates `(Cs, Sn)` at `theta` for general exponents by integrating the
/// defining initial value problem. `theta` is first reduced modulo the period.
pub fn eval_pq(p: u32, q: u32, theta: f64, tol: f64) -> Result<TrigState> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive (got {tol})")));
    }
    let omega = period(p, q)?;
    let reduced = theta.rem_euclid(omega);
    // The retry tightens the integrator but keeps the caller's acceptance limit.
    let limit = 10.0 * tol;
    let y = match integrate_once(p, q, reduced, tol, limit) {
        Ok(y) => y,
        Err(Error::Conservation { .. }) => integrate_once(p, q, reduced, tol / 10.0, limit)?,
        Err(e) => return Err(e),
    };
    Ok(TrigState { theta, cs: y[0], sn: y[1] })
}

pub fn eval(l: u32, theta: f64, tol: f64) -> Result<TrigState> {
    if l == 0 {
        return Err(Error::Domain("l must be >= 1".into()));
    }
    eval_pq(1, l, theta, tol)
}

/// `(Cs, Sn)` over one full period, stored as dense integrator steps so that
/// quadrature and plotting can sample it cheaply.
#[derive(Debug, Clone)]
pub struct GenTrig {
    l: u32,
    omega: f64,
    steps: Vec<DenseStep<2>>,
    max_residual: f64,
}

impl GenTrig {
    pub fn new(l: u32, tol: f64) -> Result<Self> {
        if l == 0 {
            return Err(Error::Domain("l must be >= 1".into()));
        }
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive (got {tol})")));
        }
        let omega = period(1, l)?;
        let mut last = None;
        for attempt_tol in [tol, tol / 10.0] {
            let (_, steps) =
                ode::solve_dense(rhs(1, l), 0.0, initial(1, l), omega, &Options::with_tol(attempt_tol))?;
            let max_residual = steps
                .iter()
                .map(|s| residual(l, s.y1[0], s.y1[1]).abs())
                .fold(0.0, f64::max);
            if max_residual <= 10.0 * tol {
                return Ok(GenTrig { l, omega, steps, max_residual });
            }
            last = Some(max_residual);
        }
        Err(Error::Conservation { theta: omega, residual: last.unwrap_or(f64::NAN), limit: 10.0 * tol })
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn period(&self) -> f64 {
        self.omega
    }

    /// Largest conservation residual seen at the step ends.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    pub fn steps(&self) -> &[DenseStep<2>] {
        &self.steps
    }

    /// `(Cs(theta), Sn(theta))`.
    pub fn at(&self, theta: f64) -> (f64, f64) {
        let t = theta.rem_euclid(self.omega);
        let idx = self.steps.partition_point(|s| s.t1() < t).min(self.steps.len() - 1);
        let y = self.steps[idx].eval(t);
        (y[0], y[1])
    }

    pub fn state(&self, theta: f64) -> TrigState {
        let (cs, sn) = self.at(theta);
        TrigState { theta, cs, sn }
    }

    /// Samples `n + 1` equally spaced points over one period (both ends included).
    pub fn sample(&self, n: usize) -> Vec<TrigState> {
        (0..=n)
            .map(|i| self.state(self.omega * i as f64 / n as f64))
            .collect()
    }
}
