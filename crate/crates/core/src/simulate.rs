//! Numerical cross-validation through the return map on the section `{x = 0, y > 0}`.
//!
//! Two independent routes: the orbit equation `dr/dθ = N(r, θ)/D(r, θ)` in
//! generalized polar coordinates, integrated together with `(Cs, Sn)` over
//! one period, and the Cartesian system with section-crossing detection.
//! On the section `r = y`, because `r^{2l} = y^{2l} + l x²`.

use std::io::{self, Write};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gtrig;
use crate::lyapunov::{Params, Stability};
use crate::ode::{self, DenseStep, Options};

/// Smallest admissible value of the orbit-equation denominator.
pub const MIN_DENOMINATOR: f64 = 0.5;

/// Relative noise floor of the floating return map.
pub const ERROR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
struct Coefficients {
    l: u32,
    m: f64,
    /// `2s - l + 2`, `(2k-1)l + 2`.
    e_cs: i32,
    e_sn: i32,
    /// `2s + 2l`, `2k + 2`.
    p_cs: i32,
    p_sn: i32,
}

impl Coefficients {
    fn new(p: &Params) -> Self {
        let (l, k, s) = (p.l as i32, p.k as i32, p.s as i32);
        Coefficients {
            l: p.l,
            m: p.m.to_f64(),
            e_cs: 2 * s - l + 2,
            e_sn: (2 * k - 1) * l + 2,
            p_cs: 2 * s + 2 * l,
            p_sn: 2 * k + 2,
        }
    }

    fn numerator(&self, r: f64, cs: f64, sn: f64) -> f64 {
        self.m * r.powi(self.e_cs) * cs.powi(self.p_cs) - r.powi(self.e_sn) * sn.powi(self.p_sn)
    }

    /// `1 - l m r^{2s-l+1} Sn Cs^{2s+1} - r^{(2k-1)l+1} Sn^{2k+1} Cs`.
    fn denominator(&self, r: f64, cs: f64, sn: f64) -> f64 {
        1.0 - self.l as f64 * self.m * r.powi(self.e_cs - 1) * sn * cs.powi(self.p_cs - 2 * self.l as i32 + 1)
            - r.powi(self.e_sn - 1) * sn.powi(self.p_sn - 1) * cs
    }
}

/// Largest `ρ` for which a crude a-priori bound keeps the denominator above
/// one half (using `|Sn| <= l^{-1/2}`, `|Cs| <= 1` and `r <= 2ρ`). The pass
/// itself is monitored; this is guidance for choosing `ρ`.
pub fn rho_max(p: &Params) -> f64 {
    let c = Coefficients::new(p);
    let sn_max = (c.l as f64).powf(-0.5);
    let dev = |rho: f64| {
        let r = 2.0 * rho;
        c.l as f64 * c.m.abs() * r.powi(c.e_cs - 1) * sn_max + r.powi(c.e_sn - 1) * sn_max.powi(c.p_sn - 1)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while dev(hi) < 1.0 - MIN_DENOMINATOR && hi < 1e6 {
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if dev(mid) < 1.0 - MIN_DENOMINATOR {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapResult {
    pub rho: f64,
    pub p_rho: f64,
    pub delta: f64,
    /// `|P_tol - P_{tol/10}|`, the step-doubling error estimate.
    pub error_estimate: f64,
    pub steps: usize,
    /// Smallest denominator value seen along the pass.
    pub min_denominator: f64,
}

fn one_pass(c: &Coefficients, rho: f64, omega: f64, tol: f64) -> Result<(f64, usize, f64)> {
    let l = c.l as i32;
    let rhs = |_t: f64, y: &[f64; 3], dy: &mut [f64; 3]| {
        let (cs, sn, r) = (y[0], y[1], y[2]);
        dy[0] = -sn;
        dy[1] = cs.powi(2 * l - 1);
        dy[2] = c.numerator(r, cs, sn) / c.denominator(r, cs, sn);
    };
    let mut min_d = 1.0f64;
    let mut bad: Option<(f64, f64)> = None;
    let opts = Options::with_tol(tol);
    let out = ode::solve(rhs, 0.0, [1.0, 0.0, rho], omega, &opts, |step: &DenseStep<3>| {
        for t in [step.t0 + 0.5 * step.h, step.t1()] {
            let y = step.eval(t);
            let d = c.denominator(y[2], y[0], y[1]);
            min_d = min_d.min(d);
            if d < MIN_DENOMINATOR || !d.is_finite() {
                bad = Some((t, d));
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })?;
    if let Some((theta, min)) = bad {
        return Err(Error::Denominator { rho, theta, min, rho_max: f64::NAN });
    }
    Ok((out.y[2], out.stats.accepted, min_d))
}

/// `P(ρ)` after one period of `θ`, with a step-doubling error estimate.
pub fn return_map(p: &Params, rho: f64, tol: f64) -> Result<ReturnMapResult> {
    p.validate()?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive (got {tol})")));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("rho must be a finite non-negative number (got {rho})")));
    }
    if rho == 0.0 {
        return Ok(ReturnMapResult { rho, p_rho: 0.0, delta: 0.0, error_estimate: 0.0, steps: 0, min_denominator: 1.0 });
    }
    let c = Coefficients::new(p);
    let omega = gtrig::period(1, p.l)?;
    let with_guidance = |e: Error| match e {
        Error::Denominator { rho, theta, min, .. } => Error::Denominator { rho, theta, min, rho_max: rho_max(p) },
        e => e,
    };
    let (coarse, _, _) = one_pass(&c, rho, omega, tol).map_err(with_guidance)?;
    let (fine, steps, min_d) = one_pass(&c, rho, omega, tol / 10.0).map_err(with_guidance)?;
    Ok(ReturnMapResult {
        rho,
        p_rho: fine,
        delta: fine - rho,
        error_estimate: (fine - coarse).abs(),
        steps,
        min_denominator: min_d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    /// `y` at the crossing, which is also `r` there.
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Crossings of `{x = 0, y > 0}` with `x` increasing, excluding the start.
    pub crossings: Vec<Crossing>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest relative defect `|ẋ_interp - f(x)|` seen at step midpoints.
    pub max_midpoint_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianOptions {
    pub t_end: f64,
    pub tol: f64,
    /// Blow-up radius.
    pub bound: f64,
    /// Stop after this many section crossings.
    pub max_crossings: Option<usize>,
    /// Keep the sample list (otherwise only crossings are recorded).
    pub keep_samples: bool,
}

impl CartesianOptions {
    pub fn new(t_end: f64, tol: f64) -> Self {
        CartesianOptions { t_end, tol, bound: 10.0, max_crossings: None, keep_samples: true }
    }
}

fn cartesian_rhs(p: &Params) -> impl Fn(f64, &[f64; 2], &mut [f64; 2]) {
    let (l, k, s) = (p.l as i32, p.k as i32, p.s as i32);
    let m = p.m.to_f64();
    move |_t, z, dz| {
        dz[0] = z[1].powi(2 * l - 1) - z[0].powi(2 * k + 1);
        dz[1] = -z[0] + m * z[1].powi(2 * s + 1);
    }
}

/// Integrates the Cartesian system and records section crossings.
pub fn integrate_cartesian(p: &Params, x0: f64, y0: f64, opts: &CartesianOptions) -> Result<Trajectory> {
    p.validate()?;
    if !(opts.tol > 0.0) || !(opts.t_end > 0.0) {
        return Err(Error::Domain("t_end and tol must be positive".into()));
    }
    let f = cartesian_rhs(p);
    let mut samples = vec![Sample { t: 0.0, x: x0, y: y0 }];
    let mut crossings = Vec::new();
    let mut blown: Option<f64> = None;
    let mut defect = 0.0f64;
    let out = ode::solve(&f, 0.0, [x0, y0], opts.t_end, &Options::with_tol(opts.tol), |step: &DenseStep<2>| {
        let [x1, y1] = step.y1;
        if opts.keep_samples {
            samples.push(Sample { t: step.t1(), x: x1, y: y1 });
        }
        // interpolant slope against the vector field at the midpoint
        let tm = step.t0 + 0.5 * step.h;
        let eps = 1e-4 * step.h;
        let (a, b) = (step.eval(tm - eps), step.eval(tm + eps));
        let mut dz = [0.0; 2];
        f(tm, &step.eval(tm), &mut dz);
        let scale = dz[0].abs().max(dz[1].abs()).max(1e-300);
        let slope = [(b[0] - a[0]) / (2.0 * eps), (b[1] - a[1]) / (2.0 * eps)];
        defect = defect.max((slope[0] - dz[0]).abs().max((slope[1] - dz[1]).abs()) / scale);

        if step.y0[0] < 0.0 && x1 >= 0.0 {
            let t = ode::root_in_step(step, |z| z[0], 1e-15);
            let y = step.eval(t)[1];
            if y > 0.0 {
                crossings.push(Crossing { t, y });
                if opts.max_crossings.is_some_and(|n| crossings.len() >= n) {
                    return ControlFlow::Break(());
                }
            }
        }
        if x1.hypot(y1) > opts.bound || !x1.is_finite() || !y1.is_finite() {
            blown = Some(step.t1());
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    if let Some(t) = blown {
        return Err(Error::BlowUp { t, bound: opts.bound });
    }
    Ok(Trajectory {
        samples,
        crossings,
        accepted_steps: out.stats.accepted,
        rejected_steps: out.stats.rejected,
        max_midpoint_defect: defect,
    })
}

/// First return to the section from `(0, ρ)` by the Cartesian route.
pub fn cartesian_return(p: &Params, rho: f64, tol: f64) -> Result<f64> {
    let omega = gtrig::period(1, p.l)?;
    // θ' ≈ r^{l-1}, so one turn takes roughly Ω / ρ^{l-1}
    let t_end = 50.0 * omega / rho.powi(p.l as i32 - 1);
    let opts = CartesianOptions { t_end, tol, bound: 10.0, max_crossings: Some(1), keep_samples: false };
    let traj = integrate_cartesian(p, 0.0, rho, &opts)?;
    traj.crossings.first().map(|c| c.y).ok_or(Error::NoCrossing { t_end })
}

/// Writes `t,x,y` rows with shortest round-trip decimal formatting.
pub fn write_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "t,x,y")?;
    for s in &traj.samples {
        writeln!(w, "{:?},{:?},{:?}", s.t, s.x, s.y)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeVerdict {
    Attractor,
    Repeller,
    Inconclusive,
}

impl ProbeVerdict {
    pub fn stability(&self) -> Option<Stability> {
        match self {
            ProbeVerdict::Attractor => Some(Stability::Attractor),
            ProbeVerdict::Repeller => Some(Stability::Repeller),
            ProbeVerdict::Inconclusive => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub rho: f64,
    pub delta: Option<f64>,
    pub error_estimate: Option<f64>,
    /// `|δ| > 10 ×` the larger of the error estimate and the noise floor.
    pub significant: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub verdict: ProbeVerdict,
    pub points: Vec<ProbePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Empirical classification from the sign of `δ(ρ) = P(ρ) - ρ` on a grid.
pub fn stability_probe(p: &Params, rho_grid: &[f64], tol: f64) -> ProbeResult {
    let points: Vec<ProbePoint> = rho_grid
        .iter()
        .map(|&rho| match return_map(p, rho, tol) {
            Ok(r) => {
                let floor = r.error_estimate.max(ERROR_FLOOR * rho);
                ProbePoint {
                    rho,
                    delta: Some(r.delta),
                    error_estimate: Some(r.error_estimate),
                    significant: r.delta.abs() > 10.0 * floor,
                    failure: None,
                }
            }
            Err(e) => ProbePoint { rho, delta: None, error_estimate: None, significant: false, failure: Some(e.to_string()) },
        })
        .collect();
    let inconclusive = |msg: String| ProbeResult { verdict: ProbeVerdict::Inconclusive, points: points.clone(), message: Some(msg) };
    if points.is_empty() {
        return inconclusive("empty rho grid".into());
    }
    if let Some(pt) = points.iter().find(|p| p.failure.is_some()) {
        return inconclusive(format!("return map failed at rho = {}: {}", pt.rho, pt.failure.as_deref().unwrap_or("")));
    }
    if let Some(pt) = points.iter().find(|p| !p.significant) {
        let hint = if p.m.is_exact() { "" } else { "; near m* supply m as an exact rational" };
        return inconclusive(format!(
            "delta at rho = {} is below 10x the integration error estimate{hint}",
            pt.rho
        ));
    }
    let pos = points.iter().all(|p| p.delta.unwrap() > 0.0);
    let neg = points.iter().all(|p| p.delta.unwrap() < 0.0);
    let verdict = match (pos, neg) {
        (true, _) => ProbeVerdict::Repeller,
        (_, true) => ProbeVerdict::Attractor,
        _ => return inconclusive("delta changes sign across the grid".into()),
    };
    ProbeResult { verdict, points, message: None }
}
