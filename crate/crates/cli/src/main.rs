//! `nilfocus` command-line front end.

mod config;
mod sweep;

use std::io::{self, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use nilfocus::certificate::{self, Certificate, Status};
use nilfocus::certify::{self, CertifyOptions, TailLemma, TailOptions};
use nilfocus::lyapunov::{self, LyapunovReport, MValue, Params};
use nilfocus::moments::{self, moment_quad};
use nilfocus::rational;
use nilfocus::simulate::{self, CartesianOptions};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "nilfocus", version, about = "Stability of nilpotent foci: exact Lyapunov constants, certificates and return maps")]
struct Cli {
    /// Output format (default: csv for simulate/sweep, json otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON run configuration; command-line knobs override it.
    #[arg(long, global = true)]
    config: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Args, Clone)]
struct SystemArgs {
    #[arg(long)]
    l: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    s: u32,
    /// `p/q` for exact input; a decimal is accepted but flagged as inexact.
    #[arg(long, allow_hyphen_values = true)]
    m: String,
}

impl SystemArgs {
    fn params(&self) -> nilfocus::Result<Params> {
        Params::new(self.l, self.k, self.s, MValue::parse(&self.m)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify the origin as attractor or repeller.
    Classify(SystemArgs),
    /// Critical parameter m*(l, k).
    Mstar {
        #[arg(long)]
        l: u32,
        #[arg(long)]
        k: u32,
    },
    /// Exact moment ∫ Sn^i Cs^j over one period.
    Moment {
        #[arg(long)]
        l: u32,
        #[arg(long)]
        i: u32,
        #[arg(long)]
        j: u32,
        /// Also evaluate by adaptive quadrature.
        #[arg(long)]
        quad: bool,
        #[arg(long)]
        quad_tol: Option<f64>,
    },
    /// Third generalized Lyapunov constant K·V + W at the critical parameter.
    Lyap {
        #[arg(long)]
        l: u32,
        #[arg(long)]
        k: u32,
        /// Cross-check against nested quadrature.
        #[arg(long)]
        numeric: bool,
        #[arg(long)]
        quad_tol: Option<f64>,
    },
    /// Exact certificates for the positivity argument.
    Certify {
        #[arg(long)]
        l: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        /// Every certificate relevant to (l, k), including the tail estimates.
        #[arg(long)]
        all: bool,
        /// Only this tail estimate: approx1, approx2, w2w1 or nu_<k>.
        #[arg(long)]
        lemma: Option<String>,
        /// Tail index N (default from the config, 10).
        #[arg(long)]
        tail_n: Option<u32>,
        /// Use each estimate's original N instead of a common one.
        #[arg(long, conflicts_with = "tail_n")]
        original_n: bool,
        /// Pairs of terms in the exponential series.
        #[arg(long)]
        exp_terms: Option<u32>,
    },
    /// Re-verify certificates stored in a JSON file.
    Recheck { file: String },
    /// Integrate a trajectory from (0, rho) and report the first return.
    Simulate {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        ode_tol: Option<f64>,
        /// Write the trajectory here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Classify, certify and simulate a grid of parameters.
    Sweep,
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Exit {
    Ok = 0,
    Failure = 1,
    BadParams = 2,
    Inconclusive = 3,
    Verification = 4,
}

impl Exit {
    fn worst(self, other: Exit) -> Exit {
        let rank = |e: Exit| match e {
            Exit::Ok => 0,
            Exit::Inconclusive => 1,
            Exit::Verification => 2,
            Exit::BadParams => 3,
            Exit::Failure => 4,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }

    fn of_certificates<'a>(certs: impl IntoIterator<Item = &'a Certificate>) -> Exit {
        certs.into_iter().fold(Exit::Ok, |acc, c| {
            acc.worst(match (c.recheck(), c.status) {
                (Err(_), _) | (_, Status::Refuted) => Exit::Verification,
                (_, Status::Inconclusive) => Exit::Inconclusive,
                _ => Exit::Ok,
            })
        })
    }
}

fn exit_for(err: &anyhow::Error) -> Exit {
    use nilfocus::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::InvalidParams(_) | E::Parse(_) | E::Domain(_) | E::Parity { .. } | E::Regime(_)) => Exit::BadParams,
        Some(E::Denominator { .. }) => Exit::BadParams,
        _ if err.downcast_ref::<config::ConfigError>().is_some() => Exit::BadParams,
        _ => Exit::Failure,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_for(&e)
        }
    };
    ExitCode::from(code as u8)
}

fn run(cli: &Cli) -> Result<Exit> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut out = io::stdout().lock();
    let fmt = |default| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Classify(sys) => classify(&mut out, fmt(Format::Json), sys),
        Command::Mstar { l, k } => mstar(&mut out, fmt(Format::Json), *l, *k),
        Command::Moment { l, i, j, quad, quad_tol } => {
            let tol = checked_tol(quad_tol.unwrap_or(cfg.quad_tol))?;
            moment(&mut out, fmt(Format::Json), *l, *i, *j, quad.then_some(tol))
        }
        Command::Lyap { l, k, numeric, quad_tol } => {
            let tol = checked_tol(quad_tol.unwrap_or(cfg.quad_tol))?;
            lyap(&mut out, fmt(Format::Json), *l, *k, numeric.then_some(tol))
        }
        Command::Certify { l, k, all, lemma, tail_n, original_n, exp_terms } => {
            let opts = CertifyOptions {
                tail_n: if *original_n { None } else { Some(tail_n.unwrap_or(cfg.tail_n)) },
                m: exp_terms.unwrap_or(cfg.exp_terms),
                ..CertifyOptions::default()
            };
            certify(&mut out, fmt(Format::Json), *l, *k, *all, lemma.as_deref(), &opts)
        }
        Command::Recheck { file } => recheck(&mut out, fmt(Format::Plain), file),
        Command::Simulate { sys, rho, t_end, ode_tol, out: path } => {
            let tol = checked_tol(ode_tol.unwrap_or(cfg.ode_tol))?;
            simulate(&mut out, fmt(Format::Csv), sys, *rho, *t_end, tol, path.as_deref())
        }
        Command::Sweep => {
            if cli.config.is_none() {
                return Err(config::ConfigError("sweep needs --config <grid.json>".into()).into());
            }
            sweep::run(&mut out, fmt(Format::Csv) == Format::Json, &cfg)
        }
    }
}

fn checked_tol(tol: f64) -> Result<f64> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(nilfocus::Error::Domain(format!("tolerance must be positive (got {tol})")).into())
    }
}

fn write_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn classify<W: Write>(out: &mut W, fmt: Format, sys: &SystemArgs) -> Result<Exit> {
    let p = sys.params()?;
    let report = lyapunov::classify(&p)?;
    match fmt {
        Format::Json => write_json(out, &report)?,
        Format::Csv => {
            writeln!(out, "l,k,s,m,regime,stability,first_index,value_float")?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.l,
                p.k,
                p.s,
                p.m,
                report.regime,
                opt(&report.stability),
                opt(&report.first_index),
                report.value_float.map(|x| format!("{x:?}")).unwrap_or_default()
            )?;
        }
        Format::Plain => write_report_plain(out, &report)?,
    }
    Ok(report_exit(&report))
}

fn report_exit(report: &LyapunovReport) -> Exit {
    let certs = Exit::of_certificates(&report.certificates);
    if report.stability.is_none() {
        certs.worst(Exit::Inconclusive)
    } else {
        certs
    }
}

fn write_report_plain<W: Write>(out: &mut W, r: &LyapunovReport) -> Result<()> {
    let p = &r.params;
    writeln!(out, "system      l={} k={} s={} m={}{}", p.l, p.k, p.s, p.m, if r.m_exact { "" } else { " (inexact)" })?;
    writeln!(out, "regime      {}", r.regime)?;
    if let (Some(i), Some(v)) = (r.first_index, &r.value) {
        writeln!(out, "first index {i}")?;
        writeln!(out, "u_{i}(Ω)     {} × {}  ≈ {:.10e}", rational::display(&v.coeff), v.base, v.to_f64())?;
    }
    writeln!(out, "stability   {}", r.stability.map(|s| s.to_string()).unwrap_or_else(|| "undecided".into()))?;
    for c in &r.certificates {
        writeln!(out, "certificate {}", certificate::summary(c))?;
    }
    if let Some(msg) = &r.message {
        writeln!(out, "note        {msg}")?;
    }
    Ok(())
}

fn mstar<W: Write>(out: &mut W, fmt: Format, l: u32, k: u32) -> Result<Exit> {
    Params::new(l, k, k * l, MValue::Exact(rational::int(0)))?;
    let m = lyapunov::m_star(l, k);
    let shown = rational::display(&m);
    match fmt {
        Format::Json => write_json(out, &json!({ "l": l, "k": k, "m_star": shown, "float_value": rational::to_f64(&m) }))?,
        Format::Csv => writeln!(out, "l,k,m_star,float_value\n{l},{k},{shown},{:?}", rational::to_f64(&m))?,
        Format::Plain => writeln!(out, "{shown}")?,
    }
    Ok(Exit::Ok)
}

#[derive(Serialize)]
struct MomentOut {
    l: u32,
    i: u32,
    j: u32,
    coeff_num: String,
    coeff_den: String,
    base: BaseOut,
    float_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    quad_value: Option<f64>,
}

#[derive(Serialize)]
struct BaseOut {
    i0: u32,
    j0: u32,
}

fn moment<W: Write>(out: &mut W, fmt: Format, l: u32, i: u32, j: u32, quad_tol: Option<f64>) -> Result<Exit> {
    if l < 1 {
        return Err(nilfocus::Error::InvalidParams("l must be >= 1".into()).into());
    }
    let m = moments::moment(l, i, j)?;
    let quad_value = match quad_tol {
        Some(tol) => {
            let trig = nilfocus::gtrig::GenTrig::new(l, tol.min(1e-12))?;
            Some(moment_quad(&trig, i, j, tol)?)
        }
        None => None,
    };
    let o = MomentOut {
        l,
        i,
        j,
        coeff_num: m.coeff.numer().to_string(),
        coeff_den: m.coeff.denom().to_string(),
        base: BaseOut { i0: m.base.i0, j0: m.base.j0 },
        float_value: m.to_f64(),
        quad_value,
    };
    match fmt {
        Format::Json => write_json(out, &o)?,
        Format::Csv => {
            writeln!(out, "l,i,j,coeff_num,coeff_den,i0,j0,float_value,quad_value")?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{:?},{}",
                o.l,
                o.i,
                o.j,
                o.coeff_num,
                o.coeff_den,
                o.base.i0,
                o.base.j0,
                o.float_value,
                o.quad_value.map(|x| format!("{x:?}")).unwrap_or_default()
            )?;
        }
        Format::Plain => {
            writeln!(out, "{} × {} ≈ {:.10e}", rational::display(&m.coeff), m.base, o.float_value)?;
            if let Some(q) = quad_value {
                writeln!(out, "quadrature  {q:.10e} (difference {:.2e})", (q - o.float_value).abs())?;
            }
        }
    }
    Ok(Exit::Ok)
}

fn lyap<W: Write>(out: &mut W, fmt: Format, l: u32, k: u32, numeric: Option<f64>) -> Result<Exit> {
    Params::new(l, k, k * l, MValue::Exact(rational::int(0)))?;
    let t = lyapunov::u_3k1(l, k)?;
    let num = numeric.map(|tol| lyapunov::u3k1_numeric(l, k, tol)).transpose()?;
    let exact = |m: &nilfocus::ExactMoment| {
        json!({
            "coeff": rational::display(&m.coeff),
            "base": { "i0": m.base.i0, "j0": m.base.j0 },
            "float_value": m.to_f64(),
        })
    };
    let mut exit = Exit::Ok;
    if let Some(n) = &num {
        if n.total.signum() as i32 != t.total.signum() {
            exit = Exit::Verification;
        }
    }
    match fmt {
        Format::Json => {
            let mut v = json!({
                "l": l,
                "k": k,
                "index_step": t.big_k,
                "index": 3 * t.big_k + 1,
                "m_star": rational::display(&t.m_star),
                "v": exact(&t.v),
                "w": exact(&t.w),
                "total": exact(&t.total),
            });
            if let Some(n) = &num {
                v["numeric"] = json!({ "v": n.v, "w": n.w, "total": n.total });
            }
            write_json(out, &v)?;
        }
        Format::Csv => {
            writeln!(out, "l,k,index,v,w,total,total_float,numeric_total")?;
            writeln!(
                out,
                "{l},{k},{},{},{},{},{:?},{}",
                3 * t.big_k + 1,
                rational::display(&t.v.coeff),
                rational::display(&t.w.coeff),
                rational::display(&t.total.coeff),
                t.total.to_f64(),
                num.map(|n| format!("{:?}", n.total)).unwrap_or_default()
            )?;
        }
        Format::Plain => {
            writeln!(out, "K = {}, m* = {}", t.big_k, rational::display(&t.m_star))?;
            for (name, m) in [("V", &t.v), ("W", &t.w), ("K·V + W", &t.total)] {
                writeln!(out, "{name:<8} {} × {}  ≈ {:.10e}", rational::display(&m.coeff), m.base, m.to_f64())?;
            }
            if let Some(n) = num {
                writeln!(out, "numeric  {:.10e}", n.total)?;
            }
        }
    }
    Ok(exit)
}

fn certify<W: Write>(
    out: &mut W,
    fmt: Format,
    l: Option<u32>,
    k: Option<u32>,
    all: bool,
    lemma: Option<&str>,
    opts: &CertifyOptions,
) -> Result<Exit> {
    let certs = match (lemma, l, k) {
        (Some(name), _, _) => {
            let lemma = TailLemma::parse(name)?;
            let n = opts.tail_n.unwrap_or_else(|| lemma.original_n());
            let to = TailOptions { n, m: opts.m, ..TailOptions::new(n, opts.m) };
            vec![certify::check_general_tail_with(lemma, &to)?]
        }
        (None, Some(l), Some(k)) => {
            Params::new(l, k, k * l, MValue::Exact(rational::int(0)))?;
            if all {
                certify::certify_all(l, k, opts)?
            } else {
                vec![certify::certify_instance(l, k)?]
            }
        }
        _ => return Err(nilfocus::Error::InvalidParams("certify needs --l and --k, or --lemma".into()).into()),
    };
    write_certificates(out, fmt, &certs)?;
    Ok(Exit::of_certificates(&certs))
}

fn write_certificates<W: Write>(out: &mut W, fmt: Format, certs: &[Certificate]) -> Result<()> {
    match fmt {
        Format::Json => write_json(out, &certs)?,
        Format::Csv => {
            writeln!(out, "claim,l,k,status,float_hint")?;
            for c in certs {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    c.claim,
                    opt(&c.l),
                    opt(&c.k),
                    serde_json::to_value(c.status)?.as_str().unwrap_or_default(),
                    c.float_hint.map(|x| format!("{x:?}")).unwrap_or_default()
                )?;
            }
        }
        Format::Plain => {
            for c in certs {
                writeln!(out, "{}", certificate::summary(c))?;
                for name in ["main/b2[0]", "1+nu", "bound", "total"] {
                    if let Some(v) = c.get(name) {
                        let shown = rational::display(&v);
                        if shown.len() <= 60 {
                            writeln!(out, "    {name} = {shown}")?;
                        } else {
                            writeln!(out, "    {name} ≈ {:.12} (exact value has {} digits)", rational::to_f64(&v), shown.len())?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn recheck<W: Write>(out: &mut W, fmt: Format, file: &str) -> Result<Exit> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {file}"))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {file}"))?;
    let certs: Vec<Certificate> = match value.get("certificates") {
        Some(inner) => serde_json::from_value(inner.clone())?,
        None if value.is_array() => serde_json::from_value(value)?,
        None => vec![serde_json::from_value(value)?],
    };
    let results: Vec<_> = certs.iter().map(|c| (c, c.recheck())).collect();
    match fmt {
        Format::Json => {
            let v: Vec<_> = results
                .iter()
                .map(|(c, r)| json!({ "claim": c.claim, "status": c.status, "recheck_ok": r.is_ok(), "error": r.as_ref().err() }))
                .collect();
            write_json(out, &v)?;
        }
        _ => {
            for (c, r) in &results {
                match r {
                    Ok(()) => writeln!(out, "ok      {}", certificate::summary(c))?,
                    Err(e) => writeln!(out, "FAILED  {e}")?,
                }
            }
        }
    }
    Ok(Exit::of_certificates(&certs))
}

fn simulate<W: Write>(
    out: &mut W,
    fmt: Format,
    sys: &SystemArgs,
    rho: f64,
    t_end: Option<f64>,
    tol: f64,
    path: Option<&str>,
) -> Result<Exit> {
    let p = sys.params()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(nilfocus::Error::Domain(format!("rho must be positive (got {rho})")).into());
    }
    let omega = nilfocus::gtrig::period(1, p.l)?;
    let t_end = t_end.unwrap_or(5.0 * omega / rho.powi(p.l as i32 - 1));
    let traj = simulate::integrate_cartesian(&p, 0.0, rho, &CartesianOptions::new(t_end, tol))?;
    let ret = simulate::return_map(&p, rho, tol).ok();
    match path {
        Some(path) => {
            let f = std::fs::File::create(path).with_context(|| format!("creating {path}"))?;
            let mut w = io::BufWriter::new(f);
            simulate::write_csv(&traj, &mut w)?;
            w.flush()?;
        }
        None if fmt == Format::Csv => simulate::write_csv(&traj, &mut *out)?,
        None => {}
    }
    let summary = json!({
        "params": p,
        "rho": rho,
        "t_end": t_end,
        "samples": traj.samples.len(),
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "max_midpoint_defect": traj.max_midpoint_defect,
        "crossings": traj.crossings,
        "return_map": ret,
    });
    match fmt {
        Format::Json => write_json(out, &summary)?,
        Format::Plain => {
            writeln!(out, "{} samples, {} section crossings", traj.samples.len(), traj.crossings.len())?;
            for c in &traj.crossings {
                writeln!(out, "  t = {:.6}  y = {:.12}", c.t, c.y)?;
            }
            if let Some(r) = ret {
                writeln!(out, "P(rho) - rho = {:.6e} (error estimate {:.1e})", r.delta, r.error_estimate)?;
            }
        }
        Format::Csv if path.is_some() => write_json(&mut io::stderr(), &summary)?,
        Format::Csv => {}
    }
    Ok(Exit::Ok)
}
