//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! Coefficients follow Hairer, Nørsett & Wanner's DOPRI5. The dense output is
//! the standard 4th-order continuous extension, stored per accepted step so
//! that callers can evaluate the solution anywhere inside the step.

use std::ops::ControlFlow;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Options {
    pub fn with_tol(tol: f64) -> Self {
        Options {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

/// One accepted step together with its interpolation coefficients.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [r2, r3, r4, r5] = &self.rcont;
        std::array::from_fn(|i| {
            self.y0[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])))
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

#[derive(Debug, Clone)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub stats: Stats,
    /// True when the observer asked to stop before `t_end`.
    pub stopped: bool,
}

fn norm<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, s)| (a / s).powi(2)).sum();
    (s / N as f64).sqrt()
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// `observer` sees every accepted step and may stop the integration early.
pub fn solve<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Options,
    mut observer: O,
) -> Result<Outcome<N>>
where
    F: FnMut(f64, &[f64; N], &mut [f64; N]),
    O: FnMut(&DenseStep<N>) -> ControlFlow<()>,
{
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0;
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(Outcome { t, y, stats, stopped: false });
    }
    let dir = span.signum();

    let mut k1 = [0.0; N];
    f(t, &y, &mut k1);
    stats.evals += 1;

    let scale0: [f64; N] = std::array::from_fn(|i| opts.atol + opts.rtol * y[i].abs());
    let mut h = match opts.h_init {
        Some(h) => h.abs(),
        None => {
            let d0 = norm(&y, &scale0);
            let d1 = norm(&k1, &scale0);
            let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            guess.min(span.abs())
        }
    }
    .min(opts.h_max);

    let mut k2 = [0.0; N];
    let mut k3 = [0.0; N];
    let mut k4 = [0.0; N];
    let mut k5 = [0.0; N];
    let mut k6 = [0.0; N];
    let mut k7 = [0.0; N];
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::TooManySteps { t, max_steps: opts.max_steps });
        }
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            return Ok(Outcome { t, y, stats, stopped: false });
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let hs = h * dir;

        let y2 = axpy(&y, hs, &[(A21, &k1)]);
        f(t + C2 * hs, &y2, &mut k2);
        let y3 = axpy(&y, hs, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * hs, &y3, &mut k3);
        let y4 = axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * hs, &y4, &mut k4);
        let y5 = axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * hs, &y5, &mut k5);
        let y6 = axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        f(t + hs, &y6, &mut k6);
        let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        f(t + hs, &y_new, &mut k7);
        stats.evals += 6;

        let err_vec: [f64; N] = std::array::from_fn(|i| {
            hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let scale: [f64; N] =
            std::array::from_fn(|i| opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs()));
        let err = norm(&err_vec, &scale);
        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            last_rejected = true;
            continue;
        }

        let mut factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
        factor = factor.clamp(0.2, 5.0);

        if err <= 1.0 {
            stats.accepted += 1;
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| hs * k1[i] - ydiff[i]);
            let step = DenseStep {
                t0: t,
                h: hs,
                y0: y,
                y1: y_new,
                rcont: [
                    ydiff,
                    bspl,
                    std::array::from_fn(|i| ydiff[i] - hs * k7[i] - bspl[i]),
                    std::array::from_fn(|i| {
                        hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i])
                    }),
                ],
            };
            t = if last { t_end } else { t + hs };
            y = y_new;
            k1 = k7;
            if observer(&step).is_break() {
                return Ok(Outcome { t, y, stats, stopped: true });
            }
            if last {
                return Ok(Outcome { t, y, stats, stopped: false });
            }
            if last_rejected {
                factor = factor.min(1.0);
            }
            last_rejected = false;
            h = (h * factor).min(opts.h_max);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h *= factor.min(1.0);
        }
    }
}

/// Integrates and keeps every dense step.
pub fn solve_dense<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Options,
) -> Result<(Outcome<N>, Vec<DenseStep<N>>)>
where
    F: FnMut(f64, &[f64; N], &mut [f64; N]),
{
    let mut steps = Vec::new();
    let out = solve(f, t0, y0, t_end, opts, |s| {
        steps.push(s.clone());
        ControlFlow::Continue(())
    })?;
    Ok((out, steps))
}

/// Locates a root of `g` inside one dense step by bisection on the interpolant.
/// `g` must change sign between the step ends.
pub fn root_in_step<const N: usize, G>(step: &DenseStep<N>, mut g: G, tol: f64) -> f64
where
    G: FnMut(&[f64; N]) -> f64,
{
    let (mut a, mut b) = (step.t0, step.t1());
    let mut ga = g(&step.y0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = g(&step.eval(m));
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
        if (b - a).abs() <= tol * (1.0 + m.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = Options::with_tol(1e-12);
        let out = solve(
            |_, y: &[f64; 1], d: &mut [f64; 1]| d[0] = -y[0],
            0.0,
            [1.0],
            3.0,
            &opts,
            |_| ControlFlow::Continue(()),
        )
        .unwrap();
        assert!((out.y[0] - (-3.0f64).exp()).abs() < 1e-11);
        assert_eq!(out.t, 3.0);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let opts = Options::with_tol(1e-12);
        let (_, steps) = solve_dense(
            |_, y: &[f64; 2], d: &mut [f64; 2]| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            0.0,
            [0.0, 1.0],
            10.0,
            &opts,
        )
        .unwrap();
        for s in &steps {
            let tm = s.t0 + 0.37 * s.h;
            let y = s.eval(tm);
            assert!((y[0] - tm.sin()).abs() < 1e-9, "dense error at {tm}");
            assert!((y[1] - tm.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn backwards_and_observer_stop() {
        let opts = Options::with_tol(1e-10);
        let out = solve(
            |_, y: &[f64; 1], d: &mut [f64; 1]| d[0] = y[0],
            1.0,
            [1.0],
            0.0,
            &opts,
            |_| ControlFlow::Continue(()),
        )
        .unwrap();
        assert!((out.y[0] - (-1.0f64).exp()).abs() < 1e-9);

        let mut n = 0;
        let out = solve(
            |_, y: &[f64; 1], d: &mut [f64; 1]| d[0] = y[0],
            0.0,
            [1.0],
            5.0,
            &opts,
            |_| {
                n += 1;
                if n == 3 {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        )
        .unwrap();
        assert!(out.stopped && out.t < 5.0);
    }

    #[test]
    fn root_finding_on_interpolant() {
        let opts = Options::with_tol(1e-12);
        let (_, steps) = solve_dense(
            |_, y: &[f64; 2], d: &mut [f64; 2]| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            0.0,
            [0.0, 1.0],
            4.0,
            &opts,
        )
        .unwrap();
        let s = steps
            .iter()
            .find(|s| s.y0[0] > 0.0 && s.y1[0] <= 0.0)
            .expect("sin crosses zero near pi");
        let t = root_in_step(s, |y| y[0], 1e-14);
        assert!((t - std::f64::consts::PI).abs() < 1e-9);
    }
}
