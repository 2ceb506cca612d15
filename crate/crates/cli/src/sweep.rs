//! Batch evaluation of a parameter grid.
//!
//! Rows are computed on a bounded rayon pool and emitted in input order, so
//! the output does not depend on the thread count.

use std::io::Write;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use nilfocus::certificate::Status;
use nilfocus::certify::{self, CertifyOptions};
use nilfocus::lyapunov::{self, Regime};
use nilfocus::simulate;

use crate::config::{Point, RunConfig};
use crate::Exit;

pub const HEADER: &str = "l,k,s,m,regime,stability,first_index,cert_ok,sim_delta";

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub l: u32,
    pub k: u32,
    pub s: u32,
    pub m: String,
    pub regime: Option<String>,
    pub stability: Option<String>,
    pub first_index: Option<u32>,
    pub cert_ok: Option<bool>,
    pub sim_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Row {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.l,
            self.k,
            self.s,
            self.m,
            self.regime.clone().unwrap_or_else(|| "error".into()),
            self.stability.clone().unwrap_or_default(),
            self.first_index.map(|i| i.to_string()).unwrap_or_default(),
            self.cert_ok.map(|b| b.to_string()).unwrap_or_default(),
            self.sim_delta.map(|x| format!("{x:?}")).unwrap_or_default(),
        )
    }

    /// Per-row errors and undecided rows are data, not failures; only a
    /// certificate that does not verify changes the exit code.
    fn exit(&self) -> Exit {
        if self.cert_ok == Some(false) {
            Exit::Verification
        } else {
            Exit::Ok
        }
    }
}

fn evaluate(pt: &Point, cfg: &RunConfig) -> Row {
    let mut row = Row {
        l: pt.l,
        k: pt.k,
        s: pt.s,
        m: pt.m.clone(),
        regime: None,
        stability: None,
        first_index: None,
        cert_ok: None,
        sim_delta: None,
        error: None,
    };
    let p = match pt.params() {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.m = p.m.to_string();
    let report = match lyapunov::classify(&p) {
        Ok(r) => r,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.regime = Some(report.regime.to_string());
    row.stability = report.stability.map(|s| s.to_string());
    row.first_index = report.first_index;
    let mut ok = report.certificates.iter().all(|c| c.recheck().is_ok() && c.status == Status::Verified);
    if report.regime == Regime::Critical {
        let opts = CertifyOptions { tail_n: Some(cfg.tail_n), m: cfg.exp_terms, ..CertifyOptions::default() };
        ok &= certify::certify_all(p.l, p.k, &opts)
            .map(|cs| certify::overall_status(&cs) == Status::Verified && cs.iter().all(|c| c.recheck().is_ok()))
            .unwrap_or(false);
    }
    row.cert_ok = Some(ok);
    match simulate::return_map(&p, cfg.rho, cfg.ode_tol) {
        Ok(r) => row.sim_delta = Some(r.delta),
        Err(e) => row.error = Some(format!("simulation: {e}")),
    }
    row
}

pub fn rows(cfg: &RunConfig) -> Result<Vec<Row>> {
    let points = cfg.sweep_points();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    Ok(pool.install(|| points.par_iter().map(|pt| evaluate(pt, cfg)).collect()))
}

pub fn run<W: Write>(out: &mut W, json: bool, cfg: &RunConfig) -> Result<Exit> {
    let rows = rows(cfg)?;
    if json {
        serde_json::to_writer_pretty(&mut *out, &rows)?;
        writeln!(out)?;
    } else {
        writeln!(out, "{HEADER}")?;
        for r in &rows {
            writeln!(out, "{}", r.csv())?;
        }
    }
    for r in &rows {
        if let Some(e) = &r.error {
            eprintln!("row l={} k={} s={} m={}: {e}", r.l, r.k, r.s, r.m);
        }
    }
    Ok(rows.iter().fold(Exit::Ok, |acc, r| acc.worst(r.exit())))
}
