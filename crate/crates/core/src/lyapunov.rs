//! Generalized Lyapunov constants and stability classification.
//!
//! In generalized polar coordinates `x = r^l Sn(θ)`, `y = r Cs(θ)` the orbit
//! through `(0, ρ)` satisfies `r(θ, ρ) = ρ + Σ u_i(θ) ρ^i`; the sign of the
//! first non-zero `u_i(Ω)` decides stability. With `K = (2k-1)l + 1`:
//!
//! * `s > kl` or `m = 0`: `u_{K+1}(Ω) = -I(2k+2, 0) < 0`;
//! * `s < kl`, `m ≠ 0`: `u_{2s-l+2}(Ω) = m I(0, 2s+2l)`;
//! * `s = kl`: `u_{K+1}(Ω) = ∫ v`, which vanishes exactly at `m = m*`, and
//!   then `u_{2K+1}(Ω) = 0` and `u_{3K+1}(Ω) = K V + W`.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::certificate::{CertBuilder, Certificate, Check};
use crate::error::{Error, Result};
use crate::gtrig::GenTrig;
use crate::moments::{self, antiderivative_odd_i, gen_factorial_int, integrate_poly, ExactMoment};
use crate::quad;
use crate::rational::{self, int, Rational};
use crate::trigpoly::{eval_float_terms, TrigPolynomial};

/// Distance below which a floating `m` in the `s = kl` regime is treated as
/// indistinguishable from `m*`.
pub const NEAR_CRITICAL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum MValue {
    Exact(Rational),
    Float(f64),
}

impl MValue {
    /// `p/q` and integers are exact; anything else is read as a float.
    pub fn parse(s: &str) -> Result<Self> {
        if let Ok(q) = rational::parse_exact(s) {
            return Ok(MValue::Exact(q));
        }
        match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(MValue::Float(x)),
            _ => Err(Error::Parse(s.to_string())),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, MValue::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            MValue::Exact(q) => rational::to_f64(q),
            MValue::Float(x) => *x,
        }
    }

    /// The exact value; a float is taken at its binary value.
    pub fn to_rational(&self) -> Rational {
        match self {
            MValue::Exact(q) => q.clone(),
            MValue::Float(x) => rational::from_f64(*x).expect("finite by construction"),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            MValue::Exact(q) => q.is_zero(),
            MValue::Float(x) => *x == 0.0,
        }
    }
}

impl fmt::Display for MValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MValue::Exact(q) => write!(f, "{}", rational::display(q)),
            MValue::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl Serialize for MValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MValue::Exact(q) => s.serialize_str(&rational::display(q)),
            MValue::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for MValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
            Num(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => MValue::parse(&s).map_err(serde::de::Error::custom),
            Raw::Int(n) => Ok(MValue::Exact(int(n))),
            Raw::Num(x) if x.is_finite() => Ok(MValue::Float(x)),
            Raw::Num(x) => Err(serde::de::Error::custom(format!("non-finite m {x}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub l: u32,
    pub k: u32,
    pub s: u32,
    pub m: MValue,
}

impl Params {
    pub fn new(l: u32, k: u32, s: u32, m: MValue) -> Result<Self> {
        let p = Params { l, k, s, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.s < 1 {
            return Err(Error::InvalidParams(format!("k and s must be >= 1 (k={}, s={})", self.k, self.s)));
        }
        if self.l < 2 || self.l > 2 * self.s {
            return Err(Error::InvalidParams(format!(
                "monodromy needs 2 <= l <= 2s (l={}, s={})",
                self.l, self.s
            )));
        }
        if let MValue::Float(x) = self.m {
            if !x.is_finite() {
                return Err(Error::InvalidParams(format!("m must be finite (got {x})")));
            }
        }
        Ok(())
    }

    pub fn index_step(&self) -> u32 {
        index_step(self.l, self.k)
    }

    pub fn kl(&self) -> u32 {
        self.k * self.l
    }
}

/// `K = (2k - 1) l + 1`.
pub fn index_step(l: u32, k: u32) -> u32 {
    (2 * k - 1) * l + 1
}

/// `m* = (2k+1)!! / (2kl+1)!_(2l)`.
pub fn m_star(l: u32, k: u32) -> Rational {
    gen_factorial_int(2 * k as i64 + 1, 2) / gen_factorial_int((2 * k * l) as i64 + 1, 2 * l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "s<kl")]
    SBelowKl,
    #[serde(rename = "s>kl")]
    SAboveKl,
    #[serde(rename = "s=kl")]
    SEqualKl,
    #[serde(rename = "s=kl,m=m*")]
    Critical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::SBelowKl => "s<kl",
            Regime::SAboveKl => "s>kl",
            Regime::SEqualKl => "s=kl",
            Regime::Critical => "s=kl,m=m*",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Attractor,
    Repeller,
}

impl Stability {
    pub fn from_sign(sign: i32) -> Option<Self> {
        match sign {
            s if s < 0 => Some(Stability::Attractor),
            s if s > 0 => Some(Stability::Repeller),
            _ => None,
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Attractor => "attractor",
            Stability::Repeller => "repeller",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Ok,
    /// Floating `m` within [`NEAR_CRITICAL`] of `m*`; no verdict is given.
    NearCritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedMoment {
    pub name: String,
    pub moment: ExactMoment,
    pub float_value: f64,
}

impl NamedMoment {
    pub fn new(name: impl Into<String>, moment: ExactMoment) -> Self {
        let float_value = moment.to_f64();
        NamedMoment { name: name.into(), moment, float_value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub params: Params,
    pub m_exact: bool,
    pub regime: Regime,
    pub status: ReportStatus,
    pub first_index: Option<u32>,
    pub value: Option<ExactMoment>,
    pub value_float: Option<f64>,
    pub stability: Option<Stability>,
    /// Moments the verdict rests on.
    pub evidence: Vec<NamedMoment>,
    pub certificates: Vec<Certificate>,
    /// Indices `j <= 3K+1` at which `u_j` can be non-zero (critical regime only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_support: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl LyapunovReport {
    fn with_value(
        p: &Params,
        regime: Regime,
        index: u32,
        value: ExactMoment,
        evidence: Vec<NamedMoment>,
    ) -> Self {
        LyapunovReport {
            params: p.clone(),
            m_exact: p.m.is_exact(),
            regime,
            status: ReportStatus::Ok,
            first_index: Some(index),
            value_float: Some(value.to_f64()),
            stability: Stability::from_sign(value.signum()),
            value: Some(value),
            evidence,
            certificates: Vec::new(),
            series_support: None,
            message: None,
        }
    }
}

pub fn v_poly(l: u32, k: u32, m: &Rational) -> TrigPolynomial {
    let mut v = TrigPolynomial::monomial(m.clone(), 0, 2 * (k + 1) * l);
    v.add_term(int(-1), 2 * k + 2, 0);
    v
}

pub fn w_poly(l: u32, k: u32, m: &Rational) -> TrigPolynomial {
    let mut w = TrigPolynomial::monomial(m * int(l as i64), 1, 2 * k * l + 1);
    w.add_term(int(1), 2 * k + 1, 1);
    w
}

/// First non-vanishing constant outside the `s = kl, m ≠ 0` regime.
pub fn u_first_nonzero_generic(p: &Params) -> Result<LyapunovReport> {
    p.validate()?;
    let (l, k, s) = (p.l, p.k, p.s);
    let kl = k * l;
    if s == kl && !p.m.is_zero() {
        return Err(Error::Regime("s = kl with m != 0 is handled by u_K1 / u_3K1".into()));
    }
    let regime = match s.cmp(&kl) {
        std::cmp::Ordering::Less => Regime::SBelowKl,
        std::cmp::Ordering::Greater => Regime::SAboveKl,
        std::cmp::Ordering::Equal => Regime::SEqualKl,
    };
    if s > kl || p.m.is_zero() {
        let sn_moment = moments::moment_exact(l, 2 * k + 2, 0)?;
        let value = sn_moment.neg();
        let ev = vec![NamedMoment::new(format!("I({}, 0)", 2 * k + 2), sn_moment)];
        Ok(LyapunovReport::with_value(p, regime, (2 * k - 1) * l + 2, value, ev))
    } else {
        let cs_moment = moments::moment_exact(l, 0, 2 * s + 2 * l)?;
        let value = cs_moment.scale(&p.m.to_rational());
        let ev = vec![NamedMoment::new(format!("I(0, {})", 2 * s + 2 * l), cs_moment)];
        Ok(LyapunovReport::with_value(p, regime, 2 * s - l + 2, value, ev))
    }
}

/// `u_{K+1}(Ω) = m I(0, 2(k+1)l) - I(2k+2, 0)`; both moments sit on `B(0, 0)`.
pub fn u_k1(l: u32, k: u32, m: &Rational) -> Result<ExactMoment> {
    let cs = moments::moment_exact(l, 0, 2 * (k + 1) * l)?;
    let sn = moments::moment_exact(l, 2 * k + 2, 0)?;
    cs.scale(m).checked_sub(&sn)
}

/// Certificate that `u_{2K+1}(Ω) = ½(K+1)(∫v)² + ∫vw` vanishes at `m = m*`.
pub fn u_2k1_is_zero(l: u32, k: u32) -> Result<Certificate> {
    let m = m_star(l, k);
    let big_k = index_step(l, k);
    let mut b = CertBuilder::new("u_2K1_zero").l(l).k(k);
    b.note("coefficients are in units of their moment bases; every term is exactly zero");
    b.put("m_star", m.clone());
    let int_v = u_k1(l, k, &m)?;
    let iv = b.put("int_v", int_v.coeff.clone());
    b.check(Check::Zero { a: iv.clone() });

    let vw = &v_poly(l, k, &m) * &w_poly(l, k, &m);
    for (n, (c, i, j)) in vw.terms().enumerate() {
        b.put(format!("vw[{n}].coeff"), c.clone());
        b.put(format!("vw[{n}].cs_exp"), int(j as i64));
        let sn = b.put(format!("vw[{n}].sn_exp"), int(i as i64));
        b.check(Check::OddInteger { a: sn });
        let mo = moments::moment(l, i, j)?;
        let z = b.put(format!("vw[{n}].moment"), mo.coeff);
        b.check(Check::Zero { a: z });
    }
    let int_vw = integrate_poly(l, &vw)?;
    let ivw = b.put("int_vw", int_vw.coeff.clone());
    b.check(Check::Zero { a: ivw.clone() });

    b.put("half_K_plus_1", Rational::new((big_k as i64 + 1).into(), 2.into()));
    b.put("int_v_sq", &int_v.coeff * &int_v.coeff);
    b.check(Check::Product { target: "int_v_sq".into(), factors: vec![iv.clone(), iv] });
    b.put("first_term", Rational::new((big_k as i64 + 1).into(), 2.into()) * &int_v.coeff * &int_v.coeff);
    b.check(Check::Product {
        target: "first_term".into(),
        factors: vec!["half_K_plus_1".into(), "int_v_sq".into()],
    });
    let total = b.put("u_2K1", Rational::zero() + b.value("first_term").unwrap() + &int_vw.coeff);
    b.check(Check::Linear { target: total.clone(), terms: vec![(1, "first_term".into()), (1, ivw)] });
    b.check(Check::Zero { a: total });
    b.float_hint(0.0);
    Ok(b.finish())
}

/// Exact third-order data at `m = m*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdOrder {
    pub l: u32,
    pub k: u32,
    pub big_k: u32,
    pub m_star: Rational,
    /// `V = -∫_0^Ω v(θ) ∫_0^θ v w`.
    pub v: ExactMoment,
    /// `W = ∫_0^Ω v w²`.
    pub w: ExactMoment,
    /// `u_{3K+1}(Ω) = K V + W`.
    pub total: ExactMoment,
    /// Antiderivative of `v w` (before subtracting its value at θ = 0).
    pub inner: TrigPolynomial,
}

pub fn u_3k1(l: u32, k: u32) -> Result<ThirdOrder> {
    if l < 2 || k < 1 {
        return Err(Error::InvalidParams(format!("need l >= 2, k >= 1 (l={l}, k={k})")));
    }
    let m = m_star(l, k);
    let big_k = index_step(l, k);
    let v = v_poly(l, k, &m);
    let w = w_poly(l, k, &m);
    let vw = &v * &w;

    let mut inner = TrigPolynomial::new();
    for (c, i, j) in vw.terms() {
        let anti = antiderivative_odd_i(l, i, j)?;
        inner = &inner + &anti.poly.scale(c);
    }
    let at_zero = inner.at_origin();
    // V = -∫ v (P - P(0)) = -∫ v P + P(0) ∫ v
    let v_int = integrate_poly(l, &v)?;
    let vp = integrate_poly(l, &(&v * &inner))?;
    let v_total = vp.neg().checked_add(&v_int.scale(&at_zero))?;
    let w_total = integrate_poly(l, &(&vw * &w))?;
    let total = v_total.scale(&int(big_k as i64)).checked_add(&w_total)?;
    Ok(ThirdOrder { l, k, big_k, m_star: m, v: v_total, w: w_total, total, inner })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericThirdOrder {
    pub v: f64,
    pub w: f64,
    pub total: f64,
}

/// Independent floating-point evaluation of `K V + W` by nested adaptive quadrature.
pub fn u3k1_numeric(l: u32, k: u32, tol: f64) -> Result<NumericThirdOrder> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive (got {tol})")));
    }
    let trig = GenTrig::new(l, tol.min(1e-12))?;
    u3k1_numeric_with(&trig, k, tol)
}

pub fn u3k1_numeric_with(trig: &GenTrig, k: u32, tol: f64) -> Result<NumericThirdOrder> {
    let l = trig.l();
    let m = m_star(l, k);
    let v = v_poly(l, k, &m).to_float_terms();
    let w = w_poly(l, k, &m).to_float_terms();
    let omega = trig.period();
    let vf = |t: f64| {
        let (cs, sn) = trig.at(t);
        eval_float_terms(&v, cs, sn)
    };
    let vwf = |t: f64| {
        let (cs, sn) = trig.at(t);
        eval_float_terms(&v, cs, sn) * eval_float_terms(&w, cs, sn)
    };
    // magnitude scales so the tolerances are relative to the integrands
    let abs_vw = quad::integrate(|t| vwf(t).abs(), 0.0, omega, 0.0, 1e-6)?.value;
    let abs_v = quad::integrate(|t| vf(t).abs(), 0.0, omega, 0.0, 1e-6)?.value;
    let inner_tol = tol * abs_vw;
    let mut inner_err = None;
    let outer = quad::integrate(
        |t| {
            let f = match quad::integrate(vwf, 0.0, t, inner_tol, 0.0) {
                Ok(r) => r.value,
                Err(e) => {
                    inner_err.get_or_insert(e);
                    f64::NAN
                }
            };
            vf(t) * f
        },
        0.0,
        omega,
        tol * abs_v * abs_vw,
        0.0,
    );
    if let Some(e) = inner_err {
        return Err(e);
    }
    let v_val = -outer?.value;
    let w_val = quad::integrate(
        |t| {
            let (cs, sn) = trig.at(t);
            let wv = eval_float_terms(&w, cs, sn);
            eval_float_terms(&v, cs, sn) * wv * wv
        },
        0.0,
        omega,
        0.0,
        tol,
    )?
    .value;
    let big_k = index_step(l, k) as f64;
    Ok(NumericThirdOrder { v: v_val, w: w_val, total: big_k * v_val + w_val })
}

/// Indices `j <= max_index` at which `u_j` may be non-zero when
/// `dr/dθ = Σ_{n>=1} f_n(θ) r^{nK+1}` and `r = ρ + Σ u_j ρ^j`.
///
/// `u_j` receives contributions from products of `nK+1` earlier coefficients
/// whose indices sum to `j`, so the support is computed by a knapsack over
/// the indices found so far.
pub fn series_support(big_k: u32, max_index: u32) -> Vec<u32> {
    let max = max_index as usize;
    // reach[c][t]: t is a sum of exactly c support indices
    let mut reach = vec![vec![false; max + 1]; max + 1];
    reach[0][0] = true;
    let mut support = Vec::new();
    let add = |reach: &mut Vec<Vec<bool>>, j: usize| {
        for c in 1..=max {
            for t in j..=max {
                if reach[c - 1][t - j] {
                    reach[c][t] = true;
                }
            }
        }
    };
    support.push(1);
    add(&mut reach, 1);
    for j in 2..=max {
        let hit = (1..)
            .map(|n| n * big_k as usize + 1)
            .take_while(|&e| e <= j)
            .any(|e| reach[e][j]);
        if hit {
            support.push(j as u32);
            add(&mut reach, j);
        }
    }
    support
}

fn support_certificate(l: u32, k: u32) -> Certificate {
    let big_k = index_step(l, k);
    let support = series_support(big_k, 3 * big_k + 1);
    let mut b = CertBuilder::new("series_support_nK_plus_1").l(l).k(k);
    b.note("every index j <= 3K+1 where u_j can be non-zero has the form nK+1");
    b.put("K", int(big_k as i64));
    for (n, j) in support.iter().enumerate() {
        let name = b.put(format!("support[{n}]"), int(*j as i64));
        // (j - 1) / K must be an integer: record it and tie it back to j
        let q = b.put(format!("support[{n}].n"), int(((j - 1) / big_k) as i64));
        b.put(format!("support[{n}].rem"), int(((j - 1) % big_k) as i64));
        b.check(Check::Zero { a: format!("support[{n}].rem") });
        b.check(Check::Linear { target: name, terms: vec![(big_k as i64, q), (1, "one".into())] });
    }
    b.put("one", int(1));
    b.finish()
}

/// Classifies the origin for the given parameters.
pub fn classify(p: &Params) -> Result<LyapunovReport> {
    p.validate()?;
    let (l, k) = (p.l, p.k);
    if p.s != p.kl() || p.m.is_zero() {
        return u_first_nonzero_generic(p);
    }
    let m_crit = m_star(l, k);
    let m = p.m.to_rational();
    if m == m_crit {
        let third = u_3k1(l, k)?;
        let big_k = third.big_k;
        let mut report = LyapunovReport::with_value(
            p,
            Regime::Critical,
            3 * big_k + 1,
            third.total.clone(),
            vec![
                NamedMoment::new("u_K1", u_k1(l, k, &m)?),
                NamedMoment::new("V", third.v.clone()),
                NamedMoment::new("W", third.w.clone()),
                NamedMoment::new("u_3K1", third.total.clone()),
            ],
        );
        report.certificates.push(u_2k1_is_zero(l, k)?);
        report.certificates.push(support_certificate(l, k));
        report.series_support = Some(series_support(big_k, 3 * big_k + 1));
        return Ok(report);
    }
    if !p.m.is_exact() && (p.m.to_f64() - rational::to_f64(&m_crit)).abs() <= NEAR_CRITICAL {
        return Ok(LyapunovReport {
            params: p.clone(),
            m_exact: false,
            regime: Regime::SEqualKl,
            status: ReportStatus::NearCritical,
            first_index: None,
            value: None,
            value_float: None,
            stability: None,
            evidence: vec![NamedMoment::new("u_K1", u_k1(l, k, &m)?)],
            certificates: Vec::new(),
            series_support: None,
            message: Some(format!(
                "near-critical: m is within {NEAR_CRITICAL:e} of m* = {}; supply m as an exact rational",
                rational::display(&m_crit)
            )),
        });
    }
    let value = u_k1(l, k, &m)?;
    let mut report = LyapunovReport::with_value(
        p,
        Regime::SEqualKl,
        index_step(l, k) + 1,
        value.clone(),
        vec![
            NamedMoment::new(format!("I(0, {})", 2 * (k + 1) * l), moments::moment_exact(l, 0, 2 * (k + 1) * l)?),
            NamedMoment::new(format!("I({}, 0)", 2 * k + 2), moments::moment_exact(l, 2 * k + 2, 0)?),
            NamedMoment::new("u_K1", value),
        ],
    );
    report.message = Some(format!(
        "m {} m* = {}",
        if m > m_crit { ">" } else { "<" },
        rational::display(&m_crit)
    ));
    Ok(report)
}

/// `true` when `m` is exactly the critical value for `(l, k)`.
pub fn is_critical(l: u32, k: u32, m: &Rational) -> bool {
    *m == m_star(l, k)
}

/// Signed distance `m - m*` (exact).
pub fn offset_from_critical(l: u32, k: u32, m: &Rational) -> Rational {
    m - m_star(l, k)
}

pub fn stability_of(value: &ExactMoment) -> Option<Stability> {
    Stability::from_sign(value.signum())
}

pub fn describe_support(support: &[u32]) -> String {
    let set: BTreeSet<_> = support.iter().collect();
    set.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")
}

pub fn is_positive(q: &Rational) -> bool {
    q.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn exact(l: u32, k: u32, s: u32, m: Rational) -> Params {
        Params::new(l, k, s, MValue::Exact(m)).unwrap()
    }

    #[test]
    fn critical_parameter_values() {
        assert_eq!(m_star(2, 1), rat(3, 5));
        assert_eq!(m_star(2, 2), rat(1, 3));
        assert_eq!(m_star(3, 1), rat(3, 7));
        assert_eq!(m_star(3, 2), rat(15, 91));
    }

    #[test]
    fn parameter_validation() {
        assert!(Params::new(1, 1, 1, MValue::Exact(int(0))).is_err());
        assert!(Params::new(5, 1, 2, MValue::Exact(int(0))).is_err());
        assert!(Params::new(2, 0, 1, MValue::Exact(int(0))).is_err());
        assert!(Params::new(2, 1, 1, MValue::Float(f64::NAN)).is_err());
        assert!(Params::new(4, 1, 2, MValue::Exact(int(0))).is_ok());
    }

    #[test]
    fn m_parsing() {
        assert_eq!(MValue::parse("3/5").unwrap(), MValue::Exact(rat(3, 5)));
        assert_eq!(MValue::parse("-2").unwrap(), MValue::Exact(int(-2)));
        assert_eq!(MValue::parse("0.6").unwrap(), MValue::Float(0.6));
        assert!(MValue::parse("abc").is_err());
        assert!(MValue::parse("inf").is_err());
    }

    #[test]
    fn generic_regimes() {
        let r = u_first_nonzero_generic(&exact(2, 1, 1, int(-1))).unwrap();
        assert_eq!(r.first_index, Some(2));
        assert_eq!(r.stability, Some(Stability::Attractor));
        assert_eq!(r.value.as_ref().unwrap().base, crate::MomentBase::of(2, 0, 6));

        let r = u_first_nonzero_generic(&exact(2, 1, 3, int(5))).unwrap();
        assert_eq!(r.first_index, Some(4));
        assert_eq!(r.regime, Regime::SAboveKl);
        assert_eq!(r.stability, Some(Stability::Attractor));

        let r = u_first_nonzero_generic(&exact(2, 1, 1, int(1))).unwrap();
        assert_eq!(r.stability, Some(Stability::Repeller));

        assert!(matches!(
            u_first_nonzero_generic(&exact(2, 1, 2, int(1))),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn u_k1_changes_sign_at_critical_value() {
        assert!(u_k1(2, 1, &rat(3, 5)).unwrap().is_zero());
        assert_eq!(u_k1(2, 1, &rat(1, 2)).unwrap().signum(), -1);
        assert_eq!(u_k1(2, 1, &int(1)).unwrap().signum(), 1);
    }

    #[test]
    fn second_order_certificate() {
        for (l, k) in [(2, 1), (3, 2), (2, 3)] {
            let c = u_2k1_is_zero(l, k).unwrap();
            assert!(c.verdict, "{c:?}");
            c.recheck().unwrap();
        }
    }

    #[test]
    fn support_has_only_nk_plus_one() {
        for (l, k) in [(2, 1), (3, 2), (6, 6)] {
            let big_k = index_step(l, k);
            let s = series_support(big_k, 3 * big_k + 1);
            assert_eq!(s, vec![1, big_k + 1, 2 * big_k + 1, 3 * big_k + 1]);
        }
        // K = 1 fills every index
        assert_eq!(series_support(1, 6), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn classification_examples() {
        let r = classify(&exact(2, 1, 2, rat(3, 5))).unwrap();
        assert_eq!(r.stability, Some(Stability::Repeller));
        assert_eq!(r.first_index, Some(10));
        assert_eq!(r.regime, Regime::Critical);
        assert!(r.certificates.iter().all(|c| c.verdict));

        let r = classify(&exact(2, 1, 1, int(0))).unwrap();
        assert_eq!(r.stability, Some(Stability::Attractor));

        let r = classify(&exact(3, 2, 6, rat(1, 3))).unwrap();
        assert_eq!(r.regime, Regime::SEqualKl);
        assert_eq!(r.first_index, Some(11));
        assert_eq!(r.stability, Some(Stability::Repeller)); // 1/3 > 15/91
    }

    #[test]
    fn near_critical_float_is_not_guessed() {
        let p = Params::new(2, 1, 2, MValue::Float(0.6)).unwrap();
        let r = classify(&p).unwrap();
        assert_eq!(r.status, ReportStatus::NearCritical);
        assert_eq!(r.stability, None);

        let p = Params::new(2, 1, 2, MValue::Float(0.7)).unwrap();
        let r = classify(&p).unwrap();
        assert_eq!(r.stability, Some(Stability::Repeller));
        assert!(!r.m_exact);
    }

    #[test]
    fn representation_of_m_does_not_matter() {
        let a = classify(&exact(2, 1, 2, rat(3, 5))).unwrap();
        let b = classify(&Params::new(2, 1, 2, MValue::parse("6/10").unwrap()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
