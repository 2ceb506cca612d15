//! Run configuration shared by the subcommands, and the sweep grid file.

use std::fmt;
use serde::{Deserialize, Serialize};

use nilfocus::lyapunov::{MValue, Params};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub quad_tol: f64,
    pub ode_tol: f64,
    /// Pairs of terms kept in the truncated exponential series.
    pub exp_terms: u32,
    pub tail_n: u32,
    /// Starting radius for the return-map column of a sweep.
    pub rho: f64,
    /// Worker cap; `NILFOCUS_THREADS` takes precedence.
    pub threads: Option<usize>,
    pub grid: Option<Grid>,
    pub points: Vec<Point>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            quad_tol: 1e-10,
            ode_tol: 1e-10,
            exp_terms: 8,
            tail_n: 10,
            rho: 0.3,
            threads: None,
            grid: None,
            points: Vec::new(),
        }
    }
}

/// Cartesian product of parameter lists; combinations violating `2 <= l <= 2s` are skipped.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub l: Vec<u32>,
    pub k: Vec<u32>,
    pub s: Vec<u32>,
    pub m: Vec<String>,
}

/// One explicitly listed parameter point; kept even when invalid so the row records the error.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub l: u32,
    pub k: u32,
    pub s: u32,
    pub m: String,
}

/// Unreadable or invalid configuration; reported with the bad-parameter exit code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

macro_rules! bail {
    ($($t:tt)*) => { return Err(ConfigError(format!($($t)*))) };
}

type Result<T> = std::result::Result<T, ConfigError>;

impl RunConfig {
    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("reading {path}: {e}")))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("parsing {path}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("quad_tol", self.quad_tol), ("ode_tol", self.ode_tol), ("rho", self.rho)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive and finite (got {v})");
            }
        }
        if self.exp_terms == 0 || self.tail_n == 0 {
            bail!("exp_terms and tail_n must be at least 1");
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        Ok(())
    }

    /// Sweep points in deterministic order: explicit points first, then the grid
    /// in `l, k, s, m` nesting order.
    pub fn sweep_points(&self) -> Vec<Point> {
        let mut out = self.points.clone();
        if let Some(g) = &self.grid {
            for &l in &g.l {
                for &k in &g.k {
                    for &s in &g.s {
                        if l < 2 || l > 2 * s {
                            continue;
                        }
                        for m in &g.m {
                            out.push(Point { l, k, s, m: m.clone() });
                        }
                    }
                }
            }
        }
        out
    }

    /// `NILFOCUS_THREADS` overrides the config value.
    pub fn thread_count(&self) -> Result<Option<usize>> {
        match std::env::var("NILFOCUS_THREADS") {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(Some(n)),
                _ => bail!("NILFOCUS_THREADS must be a positive integer (got {v:?})"),
            },
            Err(_) => Ok(self.threads),
        }
    }
}

impl Point {
    pub fn params(&self) -> nilfocus::Result<Params> {
        Params::new(self.l, self.k, self.s, MValue::parse(&self.m)?)
    }
}
