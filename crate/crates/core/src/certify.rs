//! Exact certificates for the positivity of `V`, `W` and `u_{3K+1}(Ω) = K V + W`.
//!
//! Every b/c/W term is a single moment on the common base `B(0, 2)`, so each
//! inequality below reduces to a sign or order check between rationals.
//! Certificates record the coefficients (in units of that base) and the
//! relations between them; they re-verify from the witness list alone.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    exp_lower, riemann_lower, sqrt_bounds, Direction, Poly, RationalSequence, RiemannRule,
    TailBound,
};
use crate::certificate::{CertBuilder, Certificate, Check, Status};
use crate::error::{Error, Result};
use crate::lyapunov::{index_step, m_star, u_2k1_is_zero, u_3k1};
use crate::moments::{gen_factorial_int, moment_exact, ExactMoment};
use crate::quad;
use crate::rational::{self, factorial, int, rat, Rational};

/// Riemann panels used for the integral lower bound unless told otherwise.
pub const DEFAULT_PANELS: u32 = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct TermTable {
    pub l: u32,
    pub k: u32,
    pub m_star: Rational,
    pub b1: ExactMoment,
    pub c1: ExactMoment,
    /// Indices `0..=2k+1`.
    pub b2: Vec<ExactMoment>,
    pub c2: Vec<ExactMoment>,
    /// Indices `0..=k`.
    pub b3: Vec<ExactMoment>,
    pub c3: Vec<ExactMoment>,
    /// Indices `0..=k+1`.
    pub b4: Vec<ExactMoment>,
    pub c4: Vec<ExactMoment>,
    /// `W_1 … W_6`.
    pub w: [ExactMoment; 6],
}

impl TermTable {
    /// `V = b1 - c1 - Σ(b2-c2) + Σ(b3-c3) - Σ(b4-c4)`.
    pub fn v(&self) -> Result<ExactMoment> {
        let mut acc = self.b1.checked_sub(&self.c1)?;
        for (b, c) in self.b2.iter().zip(&self.c2) {
            acc = acc.checked_sub(b)?.checked_add(c)?;
        }
        for (b, c) in self.b3.iter().zip(&self.c3) {
            acc = acc.checked_add(b)?.checked_sub(c)?;
        }
        for (b, c) in self.b4.iter().zip(&self.c4) {
            acc = acc.checked_sub(b)?.checked_add(c)?;
        }
        Ok(acc)
    }

    /// `W = W1 - W2 + W3 - W4 + W5 - W6`.
    pub fn w_total(&self) -> Result<ExactMoment> {
        let mut acc = self.w[0].clone();
        for (n, t) in self.w.iter().enumerate().skip(1) {
            acc = if n % 2 == 0 { acc.checked_add(t)? } else { acc.checked_sub(t)? };
        }
        Ok(acc)
    }

    /// `b1 - b2⁰ + Σ_{i>=1} c2ⁱ - b4⁰`.
    pub fn main_terms(&self) -> Result<ExactMoment> {
        let mut acc = self.b1.checked_sub(&self.b2[0])?.checked_sub(&self.b4[0])?;
        for c in &self.c2[1..] {
            acc = acc.checked_add(c)?;
        }
        Ok(acc)
    }

    /// `-c1 - Σ_{i>=1} b2ⁱ + c2⁰`.
    pub fn small_terms(&self) -> Result<ExactMoment> {
        let mut acc = self.c2[0].checked_sub(&self.c1)?;
        for b in &self.b2[1..] {
            acc = acc.checked_sub(b)?;
        }
        Ok(acc)
    }

    /// All entries with their display names and the sign they enter `V` or `W` with.
    pub fn entries(&self) -> Vec<(String, i64, &ExactMoment)> {
        let mut out = vec![("b1[0]".to_string(), 1, &self.b1), ("c1[0]".to_string(), -1, &self.c1)];
        let groups: [(&str, &Vec<ExactMoment>, i64); 6] = [
            ("b2", &self.b2, -1),
            ("c2", &self.c2, 1),
            ("b3", &self.b3, 1),
            ("c3", &self.c3, -1),
            ("b4", &self.b4, -1),
            ("c4", &self.c4, 1),
        ];
        for (name, list, sign) in groups {
            for (i, m) in list.iter().enumerate() {
                out.push((format!("{name}[{i}]"), sign, m));
            }
        }
        for (n, m) in self.w.iter().enumerate() {
            out.push((format!("W{}", n + 1), if n % 2 == 0 { 1 } else { -1 }, m));
        }
        out
    }
}

pub fn build_term_table(l: u32, k: u32) -> Result<TermTable> {
    if l < 2 || k < 1 {
        return Err(Error::InvalidParams(format!("need l >= 2 and k >= 1 (l={l}, k={k})")));
    }
    let (li, ki) = (l as i64, k as i64);
    let m = m_star(l, k);
    let m2 = &m * &m;
    let m3 = &m2 * &m;
    let lr = int(li);
    let d = int(2 * (2 * ki + 1) * li + 2);
    let fl = |a: i64| gen_factorial_int(a, l);
    let ifac = |i: i64| factorial(i as u32);
    let mom = |i: i64, j: i64| moment_exact(l, i as u32, j as u32);

    let b1 = mom(0, 2 * (3 * ki + 2) * li + 2)?.scale(&(&lr * &m3 / &d));
    let c1 = mom(2 * (ki + 1), 2 * (2 * ki + 1) * li + 2)?.scale(&(&lr * &m2 / &d));

    let c2f = factorial(2 * k + 1) / fl(2 * ki * li + 1);
    let mut b2 = Vec::new();
    let mut c2 = Vec::new();
    for i in 0..=(2 * ki + 1) {
        let f = &c2f * fl((i - 1) * li + 1) / ifac(i) / &d;
        b2.push(mom(2 * i, 2 * (ki + 1) * li + 2)?.scale(&(&f * &m)));
        c2.push(mom(2 * (ki + i + 1), 2)?.scale(&f));
    }

    let c3f = factorial(k) / fl(2 * ki * li + 1);
    let mut b3 = Vec::new();
    let mut c3 = Vec::new();
    for i in 0..=ki {
        let f = &c3f * fl((ki + i) * li + 1) / ifac(i) / &d;
        b3.push(mom(2 * i, 4 * (ki + 1) * li + 2)?.scale(&(&f * &m2)));
        c3.push(mom(2 * (ki + i + 1), 2 * (ki + 1) * li + 2)?.scale(&(&f * &m)));
    }

    let c4f = factorial(k + 1) / fl(2 * ki * li + 1);
    let mut b4 = Vec::new();
    let mut c4 = Vec::new();
    for i in 0..=(ki + 1) {
        let f = &c4f * fl((ki + i - 1) * li + 1) / ifac(i) / &d * &lr;
        b4.push(mom(2 * i, 2 * (2 * ki + 1) * li + 2)?.scale(&(&f * &m2)));
        c4.push(mom(2 * (ki + i + 1), 2 * ki * li + 2)?.scale(&(&f * &m)));
    }

    let l2 = &lr * &lr;
    let w = [
        mom(2, 2 * (3 * ki + 1) * li + 2)?.scale(&(&l2 * &m3)),
        mom(6 * ki + 4, 2)?,
        mom(2 * ki + 2, 2 * (2 * ki + 1) * li + 2)?.scale(&(int(2) * &lr * &m2)),
        mom(2 * ki + 4, 4 * ki * li + 2)?.scale(&(&l2 * &m2)),
        mom(4 * ki + 2, 2 * (ki + 1) * li + 2)?.scale(&m),
        mom(4 * ki + 4, 2 * ki * li + 2)?.scale(&(int(2) * &lr * &m)),
    ];
    Ok(TermTable { l, k, m_star: m, b1, c1, b2, c2, b3, c3, b4, c4, w })
}

fn put_moment(b: &mut CertBuilder, name: &str, m: &ExactMoment) -> String {
    b.put(name, m.coeff.clone())
}

fn put_ratio(b: &mut CertBuilder, name: &str, num: &str, den: &str) -> Result<String> {
    let value = b.value(num).cloned().unwrap_or_default() / b.value(den).cloned().unwrap_or_else(Rational::one);
    let n = b.put(name, value);
    b.check(Check::Quotient { target: n.clone(), num: num.into(), den: den.into() });
    Ok(n)
}

fn two_thirds_pow(e: u32) -> Rational {
    rational::pow(&rat(2, 3), e)
}

/// Ratio bounds and the three positive combinations of the small-term proposition.
pub fn check_prop_infinitesimal(l: u32, k: u32) -> Result<Certificate> {
    let t = build_term_table(l, k)?;
    let (li, ki) = (l as i64, k as i64);
    let mut b = CertBuilder::new("prop_infinitesimal").l(l).k(k);
    b.note("coefficients on the common base B(0,2)");
    let one = b.put("one", Rational::one());

    for i in 0..=k as usize {
        let ii = i as i64;
        // (i) b3^i - b4^{i+1} > 0
        let b3 = put_moment(&mut b, &format!("b3[{i}]"), &t.b3[i]);
        let b4 = put_moment(&mut b, &format!("b4[{}]", i + 1), &t.b4[i + 1]);
        let r = put_ratio(&mut b, &format!("b4[{}]/b3[{i}]", i + 1), &b4, &b3)?;
        let formula = (rat(2 * ii + 1, 2) * int(ki + 1)) / (int(ii + 1) * (int(2 * ki + 1) + rat(3, 2 * li)));
        let f = b.put(format!("(i).formula[{i}]"), formula);
        b.equal(&r, &f);
        b.less(&r, &one);
        let diff = b.put(format!("b3[{i}]-b4[{}]", i + 1), &t.b3[i].coeff - &t.b4[i + 1].coeff);
        b.check(Check::Linear { target: diff.clone(), terms: vec![(1, b3), (-1, b4)] });
        b.check(Check::Positive { a: diff });

        // (ii) -c3^i + c4^{i+1} > 0
        let c3 = put_moment(&mut b, &format!("c3[{i}]"), &t.c3[i]);
        let c4 = put_moment(&mut b, &format!("c4[{}]", i + 1), &t.c4[i + 1]);
        let r = put_ratio(&mut b, &format!("c4[{}]/c3[{i}]", i + 1), &c4, &c3)?;
        let formula = (rat(2 * (ki + ii) + 3, 2) * int(ki + 1)) / (int(ii + 1) * (int(ki) + rat(3, 2 * li)));
        let f = b.put(format!("(ii).formula[{i}]"), formula);
        b.equal(&r, &f);
        b.less(&one, &r);
        let diff = b.put(format!("c4[{}]-c3[{i}]", i + 1), &t.c4[i + 1].coeff - &t.c3[i].coeff);
        b.check(Check::Linear { target: diff.clone(), terms: vec![(1, c4), (-1, c3)] });
        b.check(Check::Positive { a: diff });
    }

    // (iii) -c1 - Σ_{i>=1} b2^i + c2^0 > 0, through the ratio bounds
    let c1 = put_moment(&mut b, "c1[0]", &t.c1);
    let c20 = put_moment(&mut b, "c2[0]", &t.c2[0]);
    let r = put_ratio(&mut b, "c1[0]/c2[0]", &c1, &c20)?;
    let bound = b.put("(iii).bound_c1", rat(3, 5) * two_thirds_pow(2 * k));
    b.less(&r, &bound);
    let mut residual_terms = vec![(1, one.clone()), (-1, bound)];
    let mut comb_terms = vec![(-1, c1), (1, c20.clone())];
    for i in 1..=(2 * k + 1) as usize {
        let name = put_moment(&mut b, &format!("b2[{i}]"), &t.b2[i]);
        let r = put_ratio(&mut b, &format!("b2[{i}]/c2[0]"), &name, &c20)?;
        let bnd = b.put(format!("(iii).bound_b2[{i}]"), rat(21, 65) * two_thirds_pow(i as u32 - 1));
        b.check(Check::LessEq { a: r, b: bnd.clone() });
        residual_terms.push((-1, bnd));
        comb_terms.push((-1, name));
    }
    let residual: Rational = residual_terms
        .iter()
        .map(|(c, n)| int(*c) * b.value(n).unwrap())
        .fold(Rational::zero(), |a, x| a + x);
    let res = b.put("(iii).residual", residual);
    b.check(Check::Linear { target: res.clone(), terms: residual_terms });
    let closed = b.put("(iii).residual_closed_form", rat(2, 65) + rat(9, 130) * two_thirds_pow(2 * k + 1));
    b.equal(&res, &closed);
    b.check(Check::Positive { a: closed.clone() });
    let small = t.small_terms()?;
    let comb = b.put("(iii).combination", small.coeff.clone());
    b.check(Check::Linear { target: comb.clone(), terms: comb_terms });
    b.check(Check::Positive { a: comb.clone() });
    let cr = put_ratio(&mut b, "(iii).combination/c2[0]", &comb, &c20)?;
    b.less(&closed, &cr);
    b.float_hint(small.to_f64());
    Ok(b.finish())
}

/// Positivity of `b1 - b2⁰ + Σ c2ⁱ - b4⁰` (and, for `l >= 3`, of `b1 - b2⁰ - b4⁰`).
pub fn check_main_terms(l: u32, k: u32) -> Result<Certificate> {
    let t = build_term_table(l, k)?;
    let mut b = CertBuilder::new("main_terms").l(l).k(k);
    b.note("coefficients on the common base B(0,2); main/b2[0] is the normalized combination");
    let b1 = put_moment(&mut b, "b1[0]", &t.b1);
    let b20 = put_moment(&mut b, "b2[0]", &t.b2[0]);
    let b40 = put_moment(&mut b, "b4[0]", &t.b4[0]);
    let mut terms = vec![(1, b1.clone()), (-1, b20.clone()), (-1, b40.clone())];
    for i in 1..t.c2.len() {
        terms.push((1, put_moment(&mut b, &format!("c2[{i}]"), &t.c2[i])));
    }
    let main = t.main_terms()?;
    let x = b.put("main", main.coeff.clone());
    b.check(Check::Linear { target: x.clone(), terms });
    b.check(Check::Positive { a: x.clone() });
    let r = put_ratio(&mut b, "main/b2[0]", &x, &b20)?;
    if l >= 3 {
        let y = b.put("b1-b2[0]-b4[0]", &t.b1.coeff - &t.b2[0].coeff - &t.b4[0].coeff);
        b.check(Check::Linear { target: y.clone(), terms: vec![(1, b1), (-1, b20), (-1, b40)] });
        b.check(Check::Positive { a: y });
    }
    let hint = rational::to_f64(b.value(&r).unwrap());
    b.float_hint(hint);
    Ok(b.finish())
}

/// Normalized main-term combination `main / b2⁰` as an exact rational.
pub fn main_terms_ratio(l: u32, k: u32) -> Result<Rational> {
    let t = build_term_table(l, k)?;
    t.main_terms()?.ratio(&t.b2[0])
}

/// The closed-form tail estimates that cover all large `(l, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "lemma", content = "k")]
pub enum TailLemma {
    /// `3 (2/3 e^{-(1/3+3/32)/N} Π… - 5/168) > 1` for `l, k >= 3`.
    Approx1,
    /// `14/9 λ_N + 5√2/21 μ_N ∫ - 11/130 - 1 > 0` for `l = 2`, `k >= 3`.
    Approx2,
    /// `(1/4) Π_{j<=N}(1 + a_j) e^{1/N} < 1`.
    W2W1,
    /// `1 + ν_k > 0` for `k >= 2`.
    NuK(u32),
}

impl TailLemma {
    /// `N` used in the original argument.
    pub fn original_n(&self) -> u32 {
        match self {
            TailLemma::Approx1 => 10,
            TailLemma::Approx2 => 3,
            TailLemma::W2W1 => 2,
            TailLemma::NuK(_) => 0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "approx1" => Ok(TailLemma::Approx1),
            "approx2" => Ok(TailLemma::Approx2),
            "w2w1" | "W2W1" => Ok(TailLemma::W2W1),
            _ => s
                .strip_prefix("nu_")
                .or_else(|| s.strip_prefix("nu"))
                .and_then(|k| k.parse().ok())
                .map(TailLemma::NuK)
                .ok_or_else(|| Error::Parse(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailOptions {
    pub n: u32,
    /// Pairs of terms in the truncated exponential series.
    pub m: u32,
    pub panels: u32,
    pub rule: RiemannRule,
}

impl TailOptions {
    pub fn new(n: u32, m: u32) -> Self {
        TailOptions { n, m, panels: DEFAULT_PANELS, rule: RiemannRule::RightEndpoint }
    }
}

pub fn lambda_first() -> RationalSequence {
    RationalSequence::new(Poly::from_ints(&[1]), Poly::from_ints(&[0, 2, 8]))
}

pub fn lambda_second() -> RationalSequence {
    let den = [(4, 3), (12, 9), (12, 5), (12, 1)]
        .iter()
        .fold(Poly::from_ints(&[1]), |acc, &(a, c)| &acc * &Poly::linear(a, c));
    RationalSequence::new(Poly::from_ints(&[240, 1728, 2304]), den)
}

pub fn mu_sequence() -> RationalSequence {
    RationalSequence::new(Poly::linear(3, -1), Poly::from_ints(&[0, 0, 0, 4]))
}

pub fn w2w1_sequence() -> RationalSequence {
    let den = &(&Poly::linear(2, 1).pow(2) * &Poly::linear(3, -1)) * &Poly::linear(3, -2);
    RationalSequence::new(Poly::from_ints(&[-2, 1, 18]), den)
}

pub fn approx1_first() -> RationalSequence {
    RationalSequence::new(Poly::from_ints(&[1]), Poly::from_ints(&[0, 0, 4]))
}

pub fn approx1_second() -> RationalSequence {
    RationalSequence::new(Poly::from_ints(&[3]), Poly::from_ints(&[-1, 0, 36]))
}

/// Records the tail hypothesis for one product and returns `(partial product, tail factor)`.
fn record_tail(
    b: &mut CertBuilder,
    name: &str,
    seq: &RationalSequence,
    constant: Rational,
    direction: Direction,
    opts: &TailOptions,
) -> Result<(String, Option<Rational>)> {
    let a_bar = seq.limit_n2().ok_or_else(|| Error::Domain(format!("{name}: n² a_n has no finite limit")))?;
    let tb = TailBound { epsilon: &constant - &a_bar, a_bar: a_bar.clone(), n: opts.n, direction };
    let chk = tb.check(seq, opts.m);
    b.put(format!("{name}.a_bar"), a_bar);
    b.put(format!("{name}.C"), constant);
    for (i, c) in chk.shifted.iter().enumerate() {
        let n = b.put(format!("{name}.tail_poly[t^{i}]"), c.clone());
        b.check(if i == 0 { Check::Positive { a: n } } else { Check::NonNegative { a: n } });
    }
    // sign, range and denominator side conditions (0 <= a_n < 1 and Q(n) > 0)
    let side = b.put(format!("{name}.side_conditions"), int(chk.ok as i64));
    b.check(Check::Positive { a: side });
    let sign = if direction == Direction::Lower { -1 } else { 1 };
    let partial = b.put(format!("{name}.partial_product"), seq.partial_product(opts.n, sign));
    Ok((partial, chk.factor))
}

/// Rational re-verification of one of the closed-form tail estimates.
pub fn check_general_tail(lemma: TailLemma, n: u32, m: u32) -> Result<Certificate> {
    check_general_tail_with(lemma, &TailOptions::new(n, m))
}

pub fn check_general_tail_with(lemma: TailLemma, opts: &TailOptions) -> Result<Certificate> {
    if opts.n == 0 && !matches!(lemma, TailLemma::NuK(_)) {
        return Err(Error::InvalidParams("tail index N must be >= 1".into()));
    }
    match lemma {
        TailLemma::Approx1 => approx1(opts),
        TailLemma::Approx2 => approx2(opts),
        TailLemma::W2W1 => w2w1(opts),
        TailLemma::NuK(k) => nu_k_certificate(k),
    }
}

/// `(2/3) Π_{j<=k}(4j²-1)/(4j²) · Π_{j<=k}(9j²-1)/(9j²-1/4)`, the per-`l` lower bound on `b1/b2⁰`.
pub fn b1_over_b2_lower_per_l(k: u32) -> Rational {
    (1..=k as i64).fold(rat(2, 3), |acc, j| {
        acc * rat(4 * j * j - 1, 4 * j * j) * (int(9 * j * j - 1) / (int(9 * j * j) - rat(1, 4)))
    })
}

/// `5 / (21 · 2^k)`, the per-`l` upper bound on `b4⁰/b2⁰` for `l >= 3`.
pub fn b4_over_b2_upper_per_l(k: u32) -> Rational {
    rat(5, 21) / rational::pow(&int(2), k)
}

fn approx1(opts: &TailOptions) -> Result<Certificate> {
    let mut b = CertBuilder::new("approx1").inconclusive_on_failure();
    b.note("lower bound on b1/b2[0] - b4[0]/b2[0] for l, k >= 3 (the l factor is bounded below by 3)");
    b.put("N", int(opts.n as i64));
    b.put("M", int(opts.m as i64));
    let one = b.put("one", Rational::one());
    let (p1, _) = record_tail(&mut b, "first", &approx1_first(), rat(1, 3), Direction::Lower, opts)?;
    let (p2, _) = record_tail(&mut b, "second", &approx1_second(), rat(3, 32), Direction::Lower, opts)?;
    // exp(-a)exp(-b) = exp(-(a+b)); bound the combined exponent once
    let arg = (rat(1, 3) + rat(3, 32)) / int(opts.n as i64);
    b.put("exp_arg", arg.clone());
    let e = b.put("exp_lower", exp_lower(&arg, opts.m));
    let tt = b.put("two_thirds", rat(2, 3));
    let prod_val = rat(2, 3) * b.value(&e).unwrap() * b.value(&p1).unwrap() * b.value(&p2).unwrap();
    let prod = b.put("product", prod_val);
    b.check(Check::Product { target: prod.clone(), factors: vec![tt, e, p1.clone(), p2.clone()] });
    let sub = b.put("b4_bound_k3", b4_over_b2_upper_per_l(3));
    let inner = b.put("inner", b.value(&prod).unwrap() - b.value(&sub).unwrap());
    b.check(Check::Linear { target: inner.clone(), terms: vec![(1, prod), (-1, sub)] });
    let bound = b.put("bound", int(3) * b.value(&inner).unwrap());
    b.check(Check::Linear { target: bound.clone(), terms: vec![(3, inner)] });
    b.less(&one, &bound);

    // k = 1, 2 are handled by the finite products directly
    for k in [1u32, 2] {
        let lo = b.put(format!("k{k}.b1_over_b2_per_l"), b1_over_b2_lower_per_l(k));
        let hi = b.put(format!("k{k}.b4_over_b2_per_l"), b4_over_b2_upper_per_l(k));
        let margin = b.put(format!("k{k}.margin"), b.value(&lo).unwrap() - b.value(&hi).unwrap());
        b.check(Check::Linear { target: margin.clone(), terms: vec![(1, lo), (-1, hi)] });
        let three = b.put(format!("k{k}.three_margin"), int(3) * b.value(&margin).unwrap());
        b.check(Check::Linear { target: three.clone(), terms: vec![(3, margin)] });
        b.less(&one, &three);
    }

    let pf = |s: &RationalSequence| (1..=opts.n).map(|n| 1.0 - rational::to_f64(&s.at(n))).product::<f64>();
    let inner_f = 2.0 / 3.0 * (-rational::to_f64(&arg)).exp() * pf(&approx1_first()) * pf(&approx1_second())
        - 5.0 / 168.0;
    b.float_hint(inner_f);
    Ok(b.finish())
}

fn approx2(opts: &TailOptions) -> Result<Certificate> {
    let mut b = CertBuilder::new("approx2").inconclusive_on_failure();
    b.note("lower bound on the normalized main-term combination for l = 2, k >= 3");
    let n = opts.n as i64;
    b.put("N", int(n));
    b.put("M", int(opts.m as i64));
    b.put("panels", int(opts.panels as i64));
    let (pa, fa) = record_tail(&mut b, "lambda.first", &lambda_first(), rat(1, 8), Direction::Lower, opts)?;
    let (pb, fb) = record_tail(&mut b, "lambda.second", &lambda_second(), rat(1, 3), Direction::Lower, opts)?;
    let ea = b.put("lambda.first.exp_lower", fa.unwrap());
    let eb = b.put("lambda.second.exp_lower", fb.unwrap());
    let lambda_val: Rational = [&ea, &pa, &eb, &pb].iter().map(|s| b.value(s).unwrap().clone()).product();
    let lambda = b.put("lambda_lower", lambda_val);
    b.check(Check::Product { target: lambda.clone(), factors: vec![ea, pa, eb, pb] });

    let (pm, _) = record_tail(&mut b, "mu", &mu_sequence(), int(1), Direction::Lower, opts)?;
    // μ_N = exp(-1/(2N)) sqrt(Π_{j<=N}(1 - a_j))
    let em = b.put("mu.exp_lower", exp_lower(&rat(1, 2 * n), opts.m));
    let sqrt_p = sqrt_bounds(b.value(&pm).unwrap(), 4).0;
    let sp = b.put("mu.sqrt_partial_lower", sqrt_p.clone());
    let sp_sq = b.put("mu.sqrt_partial_lower_sq", &sqrt_p * &sqrt_p);
    b.check(Check::Product { target: sp_sq.clone(), factors: vec![sp.clone(), sp.clone()] });
    b.check(Check::LessEq { a: sp_sq, b: pm });
    let mu = b.put("mu_lower", b.value(&em).unwrap() * &sqrt_p);
    b.check(Check::Product { target: mu.clone(), factors: vec![em, sp] });

    let s2 = sqrt_bounds(&int(2), 4).0;
    let s2n = b.put("sqrt2_lower", s2.clone());
    let s2sq = b.put("sqrt2_lower_sq", &s2 * &s2);
    b.check(Check::Product { target: s2sq.clone(), factors: vec![s2n.clone(), s2n.clone()] });
    let two = b.put("two", int(2));
    b.check(Check::LessEq { a: s2sq, b: two });
    let integral = b.put("integral_lower", riemann_lower(opts.panels, opts.rule));

    let c14 = b.put("fourteen_ninths", rat(14, 9));
    let c5 = b.put("five_over_21", rat(5, 21));
    let t1 = b.put("term_lambda", rat(14, 9) * b.value(&lambda).unwrap());
    b.check(Check::Product { target: t1.clone(), factors: vec![c14, lambda.clone()] });
    let t2_val = rat(5, 21) * &s2 * b.value(&mu).unwrap() * b.value(&integral).unwrap();
    let t2 = b.put("term_mu", t2_val);
    b.check(Check::Product { target: t2.clone(), factors: vec![c5, s2n, mu.clone(), integral.clone()] });
    let b4t = b.put("b4_bound_k3", rat(11, 130));
    let one = b.put("one", Rational::one());
    let bound_val = b.value(&t1).unwrap() + b.value(&t2).unwrap() - rat(11, 130) - Rational::one();
    let bound = b.put("bound", bound_val);
    b.check(Check::Linear { target: bound.clone(), terms: vec![(1, t1), (1, t2), (-1, b4t), (-1, one)] });
    b.check(Check::Positive { a: bound });

    b.float_hint(approx2_float(opts.n)?);
    Ok(b.finish())
}

/// Floating evaluation of the approx-(2) right-hand side with true exponentials and integral.
pub fn approx2_float(n: u32) -> Result<f64> {
    let nf = n as f64;
    let pf = |s: &RationalSequence| (1..=n).map(|j| 1.0 - rational::to_f64(&s.at(j))).product::<f64>();
    let lambda = (-1.0 / (8.0 * nf)).exp() * pf(&lambda_first()) * (-1.0 / (3.0 * nf)).exp() * pf(&lambda_second());
    let mu = (-1.0 / (2.0 * nf)).exp() * pf(&mu_sequence()).sqrt();
    let integral = integral_value()?;
    Ok(14.0 / 9.0 * lambda + 5.0 * 2f64.sqrt() / 21.0 * mu * integral - 11.0 / 130.0 - 1.0)
}

/// `∫_{1/2}^{2} x^{-1/2}(1+x)^{-3/4} dx` by adaptive quadrature.
pub fn integral_value() -> Result<f64> {
    Ok(quad::integrate(|x| x.powf(-0.5) * (1.0 + x).powf(-0.75), 0.5, 2.0, 1e-14, 1e-14)?.value)
}

fn w2w1(opts: &TailOptions) -> Result<Certificate> {
    let mut b = CertBuilder::new("w2w1").inconclusive_on_failure();
    b.note("upper bound on W2/W1 valid for every l >= 2, k >= 1");
    b.put("N", int(opts.n as i64));
    b.put("M", int(opts.m as i64));
    let seq = w2w1_sequence();
    for j in 1..=opts.n {
        b.put(format!("factor[{j}]"), Rational::one() + seq.at(j));
    }
    let (p, f) = record_tail(&mut b, "tail", &seq, int(1), Direction::Upper, opts)?;
    let factors: Vec<String> = (1..=opts.n).map(|j| format!("factor[{j}]")).collect();
    b.check(Check::Product { target: p.clone(), factors });
    let e = b.put("exp_upper", f.ok_or_else(|| Error::Domain("exponential series too short".into()))?);
    let q = b.put("quarter", rat(1, 4));
    let bound = b.put("bound", rat(1, 4) * b.value(&p).unwrap() * b.value(&e).unwrap());
    b.check(Check::Product { target: bound.clone(), factors: vec![q, p.clone(), e] });
    let one = b.put("one", Rational::one());
    b.less(&bound, &one);
    let pf = rational::to_f64(b.value(&p).unwrap());
    b.float_hint(0.25 * pf * (1.0 / opts.n as f64).exp());
    Ok(b.finish())
}

/// `ν_k = -(2k+3)/(8k) - (3k+3)/(4k+3) Π_{j<=k}(1 - (64j³+84j²+20j)/((2j+1)²(8j+3)(8j-1)))`.
pub fn nu(k: u32) -> Rational {
    let ki = k as i64;
    let prod = (1..=ki).fold(Rational::one(), |acc, j| {
        acc * (Rational::one()
            - rat(64 * j * j * j + 84 * j * j + 20 * j, (2 * j + 1) * (2 * j + 1) * (8 * j + 3) * (8 * j - 1)))
    });
    -rat(2 * ki + 3, 8 * ki) - rat(3 * ki + 3, 4 * ki + 3) * prod
}

fn nu_k_certificate(k: u32) -> Result<Certificate> {
    if k < 2 {
        return Err(Error::InvalidParams("1 + nu_k > 0 needs k >= 2; k = 1 is covered by the k1_w chain".into()));
    }
    let mut b = CertBuilder::new("nu_k").k(k);
    let v = b.put("nu_k", nu(k));
    let one = b.put("one", Rational::one());
    let s = b.put("one_plus_nu_k", Rational::one() + nu(k));
    b.check(Check::Linear { target: s.clone(), terms: vec![(1, one), (1, v)] });
    b.check(Check::Positive { a: s });
    b.float_hint(rational::to_f64(&(Rational::one() + nu(k))));
    Ok(b.finish())
}

/// `ν_k < ν_{k+1}` for `k = 1 .. k_max-1`, checked exactly.
pub fn check_nu_increasing(k_max: u32) -> Certificate {
    let mut b = CertBuilder::new("nu_increasing");
    b.note("nu_k strictly increasing on the checked range");
    for k in 1..=k_max {
        b.put(format!("nu[{k}]"), nu(k));
        if k > 1 {
            b.less(&format!("nu[{}]", k - 1), &format!("nu[{k}]"));
        }
    }
    b.finish()
}

/// The `k = 1` chain `W/W3 > (W1/W3)(1 - W2/W1) + 1 + ν_1 >= 37/24 - 169/616 > 0`.
pub fn check_k1_w(l: u32) -> Result<Certificate> {
    let t = build_term_table(l, 1)?;
    let mut b = CertBuilder::new("k1_w").l(l).k(1);
    b.note("W coefficients on the common base B(0,2)");
    let names: Vec<String> = (0..6).map(|n| put_moment(&mut b, &format!("W{}", n + 1), &t.w[n])).collect();
    let w = t.w_total()?;
    let wn = b.put("W", w.coeff.clone());
    b.check(Check::Linear {
        target: wn.clone(),
        terms: names.iter().enumerate().map(|(n, s)| (if n % 2 == 0 { 1 } else { -1 }, s.clone())).collect(),
    });
    let w1w3 = put_ratio(&mut b, "W1/W3", &names[0], &names[2])?;
    let tl = b.put("3l/2", rat(3 * l as i64, 2));
    b.equal(&w1w3, &tl);
    let three = b.put("three", int(3));
    b.check(Check::LessEq { a: three.clone(), b: tl });
    let w2w1 = put_ratio(&mut b, "W2/W1", &names[1], &names[0])?;
    let bound_a = b.put("W2/W1_bound", rat(35, 72));
    b.less(&w2w1, &bound_a);

    let rest_val = (&t.w[4].coeff - &t.w[3].coeff - &t.w[5].coeff) / &t.w[2].coeff;
    let rest = b.put("(-W4+W5-W6)/W3", rest_val);
    let nu1 = b.put("nu_1", nu(1));
    b.less(&nu1, &rest);
    let opn = b.put("one_plus_nu_1", Rational::one() + nu(1));
    let lit = b.put("minus_169_616", rat(-169, 616));
    b.equal(&opn, &lit);

    let one = b.put("one", Rational::one());
    let gap = b.put("1-35/72", rat(37, 72));
    b.check(Check::Linear { target: gap.clone(), terms: vec![(1, one.clone()), (-1, bound_a)] });
    let chain = b.put("chain_lower", int(3) * rat(37, 72) + rat(-169, 616));
    b.check(Check::Linear { target: chain.clone(), terms: vec![(3, gap), (1, opn.clone())] });
    let lit2 = b.put("37/24-169/616", rat(37, 24) - rat(169, 616));
    b.equal(&chain, &lit2);
    b.check(Check::Positive { a: chain.clone() });

    // the actual instance sits above the chain
    let w1w3v = b.value(&w1w3).unwrap().clone();
    let w2w1v = b.value(&w2w1).unwrap().clone();
    let inst = b.put("instance_lower", &w1w3v * (Rational::one() - &w2w1v) + Rational::one() + nu(1));
    b.check(Check::LessEq { a: chain, b: inst.clone() });
    let ww3 = put_ratio(&mut b, "W/W3", &wn, &names[2])?;
    b.less(&inst, &ww3);
    b.check(Check::Positive { a: ww3 });
    b.float_hint(w.to_f64());
    let _ = three;
    Ok(b.finish())
}

/// The `k >= 2` chain: `W2/W1` below its finite-product bound, the remaining
/// ratio above `ν_k`, and `1 + ν_k >= 1 + ν_2 > 0`.
pub fn check_w_bounds(l: u32, k: u32) -> Result<Certificate> {
    if k < 2 {
        return Err(Error::InvalidParams("check_w_bounds needs k >= 2 (use check_k1_w)".into()));
    }
    let t = build_term_table(l, k)?;
    let mut b = CertBuilder::new("w_bounds").l(l).k(k);
    b.note("W coefficients on the common base B(0,2)");
    let names: Vec<String> = (0..6).map(|n| put_moment(&mut b, &format!("W{}", n + 1), &t.w[n])).collect();
    let w2w1 = put_ratio(&mut b, "W2/W1", &names[1], &names[0])?;
    let seq = w2w1_sequence();
    let bound = b.put("W2/W1_product_bound", rat(1, 4) * seq.partial_product(k, 1));
    b.less(&w2w1, &bound);
    let one = b.put("one", Rational::one());
    b.less(&w2w1, &one);
    let rest = b.put("(-W4+W5-W6)/W3", (&t.w[4].coeff - &t.w[3].coeff - &t.w[5].coeff) / &t.w[2].coeff);
    let nuk = b.put("nu_k", nu(k));
    b.less(&nuk, &rest);
    let nu2 = b.put("nu_2", nu(2));
    b.check(Check::LessEq { a: nu2.clone(), b: nuk });
    let opn2 = b.put("one_plus_nu_2", Rational::one() + nu(2));
    b.check(Check::Linear { target: opn2.clone(), terms: vec![(1, one), (1, nu2)] });
    let lit = b.put("333/16720", rat(333, 16720));
    b.equal(&opn2, &lit);
    b.check(Check::Positive { a: opn2 });
    let w = t.w_total()?;
    let wn = b.put("W", w.coeff.clone());
    let lower = b.put("W3(1+nu_k)", &t.w[2].coeff * (Rational::one() + nu(k)));
    b.less(&lower, &wn);
    b.check(Check::Positive { a: lower });
    b.float_hint(w.to_f64());
    Ok(b.finish())
}

/// Direct check of `V > 0`, `W > 0` and `K V + W > 0` by summing the full term table.
pub fn certify_instance(l: u32, k: u32) -> Result<Certificate> {
    let t = build_term_table(l, k)?;
    let mut b = CertBuilder::new("instance").l(l).k(k);
    b.note("coefficients on the common base B(0,2); V_antiderivative is the independent expansion route");
    let mut v_terms = Vec::new();
    let mut w_terms = Vec::new();
    for (name, sign, m) in t.entries() {
        let n = put_moment(&mut b, &name, m);
        if name.starts_with('W') {
            w_terms.push((sign, n));
        } else {
            v_terms.push((sign, n));
        }
    }
    let v = t.v()?;
    let w = t.w_total()?;
    let vn = b.put("V", v.coeff.clone());
    b.check(Check::Linear { target: vn.clone(), terms: v_terms });
    b.check(Check::Positive { a: vn.clone() });
    let wn = b.put("W", w.coeff.clone());
    b.check(Check::Linear { target: wn.clone(), terms: w_terms });
    b.check(Check::Positive { a: wn.clone() });
    let big_k = index_step(l, k) as i64;
    b.put("K", int(big_k));
    let total = v.scale(&int(big_k)).checked_add(&w)?;
    let tn = b.put("u_3K1", total.coeff.clone());
    b.check(Check::Linear { target: tn.clone(), terms: vec![(big_k, vn.clone()), (1, wn.clone())] });
    b.check(Check::Positive { a: tn });

    let third = u_3k1(l, k)?;
    let va = b.put("V_antiderivative", third.v.coeff.clone());
    b.equal(&vn, &va);
    let wa = b.put("W_direct", third.w.coeff.clone());
    b.equal(&wn, &wa);
    b.float_hint(total.to_f64());
    Ok(b.finish())
}

/// Symmetrization identity `Π_{j=0}^{k} (j+u)/(k+j+3u) = 3^{-(k+1)} sqrt(Π (1 - 2(k-2j)²/D_j))`,
/// checked exactly after squaring, plus the monotonicity in `u` between the
/// two smallest `l` (`u = 1/6` and `u = 1/4`).
pub fn check_product_identity(k: u32, u: &Rational) -> Certificate {
    let ki = k as i64;
    let lhs_at = |u: &Rational| {
        (0..=ki).fold(Rational::one(), |acc, j| acc * (int(j) + u) / (int(ki + j) + int(3) * u))
    };
    let lhs = lhs_at(u);
    let inner = (0..=ki).fold(Rational::one(), |acc, j| {
        let d = int((ki + j) * (2 * ki - j)) + int(9 * ki) * u + int(9) * u * u;
        acc * (Rational::one() - int(2 * (ki - 2 * j) * (ki - 2 * j)) / d)
    });
    let mut b = CertBuilder::new("product_identity").k(k);
    b.put("u", u.clone());
    let ln = b.put("lhs", lhs.clone());
    let sq = b.put("lhs_sq", &lhs * &lhs);
    b.check(Check::Product { target: sq.clone(), factors: vec![ln.clone(), ln] });
    let nine = b.put("nine_pow", rational::pow(&int(9), k + 1));
    let scaled = b.put("lhs_sq_times_nine_pow", &lhs * &lhs * rational::pow(&int(9), k + 1));
    b.check(Check::Product { target: scaled.clone(), factors: vec![sq, nine] });
    let inn = b.put("inner_product", inner.clone());
    b.equal(&scaled, &inn);
    let lo = b.put("lhs_at_1/6", lhs_at(&rat(1, 6)));
    let hi = b.put("lhs_at_1/4", lhs_at(&rat(1, 4)));
    b.less(&lo, &hi);
    let resid = rational::to_f64(&lhs) - 3f64.powi(-(k as i32 + 1)) * rational::to_f64(&inner).sqrt();
    b.float_hint(resid);
    b.finish()
}

/// Monotonicity in `k` of the approx-(2) right-hand side on `k_lo..=k_hi`:
/// the integral's lower limit `2/(k+1)` and the term `11/(65·2^{k-2})` both
/// strictly decrease; the exact normalized combination at `l = 2` is also
/// recorded and checked positive.
pub fn check_approx2_increasing(k_lo: u32, k_hi: u32) -> Result<Certificate> {
    if k_lo < 3 || k_hi < k_lo {
        return Err(Error::InvalidParams(format!("need 3 <= k_lo <= k_hi (got {k_lo}..{k_hi})")));
    }
    let mut b = CertBuilder::new("approx2_increasing_in_k");
    b.note("checked on a finite range only");
    for k in k_lo..=k_hi {
        let ki = k as i64;
        b.put(format!("lower_limit[{k}]"), rat(2, ki + 1));
        b.put(format!("b4_term[{k}]"), rat(11, 65) / rational::pow(&int(2), k - 2));
        let r = b.put(format!("main/b2[0][{k}]"), main_terms_ratio(2, k)?);
        b.check(Check::Positive { a: r });
        if k > k_lo {
            b.less(&format!("lower_limit[{k}]"), &format!("lower_limit[{}]", k - 1));
            b.less(&format!("b4_term[{k}]"), &format!("b4_term[{}]", k - 1));
        }
    }
    Ok(b.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertifyOptions {
    /// Tail index `N` for the closed-form estimates (`None`: the original per-lemma values).
    pub tail_n: Option<u32>,
    pub m: u32,
    pub panels: u32,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { tail_n: Some(10), m: 8, panels: DEFAULT_PANELS }
    }
}

/// Every certificate relevant to `(l, k)`.
pub fn certify_all(l: u32, k: u32, opts: &CertifyOptions) -> Result<Vec<Certificate>> {
    let mut out = vec![
        u_2k1_is_zero(l, k)?,
        check_prop_infinitesimal(l, k)?,
        check_main_terms(l, k)?,
        if k == 1 { check_k1_w(l)? } else { check_w_bounds(l, k)? },
        certify_instance(l, k)?,
    ];
    if k >= 2 {
        out.push(nu_k_certificate(k)?);
    }
    for lemma in [TailLemma::Approx1, TailLemma::Approx2, TailLemma::W2W1] {
        let n = opts.tail_n.unwrap_or_else(|| lemma.original_n());
        let to = TailOptions { n, m: opts.m, panels: opts.panels, rule: RiemannRule::RightEndpoint };
        out.push(check_general_tail_with(lemma, &to)?);
    }
    Ok(out)
}

/// Worst status over a set of certificates (`Refuted` > `Inconclusive` > `Verified`).
pub fn overall_status(certs: &[Certificate]) -> Status {
    if certs.iter().any(|c| c.status == Status::Refuted) {
        Status::Refuted
    } else if certs.iter().any(|c| c.status == Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Verified
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_route_matches_antiderivative_route() {
        for (l, k) in [(2, 1), (3, 1), (2, 2), (3, 2)] {
            let t = build_term_table(l, k).unwrap();
            let third = u_3k1(l, k).unwrap();
            assert_eq!(t.v().unwrap(), third.v, "V at ({l},{k})");
            assert_eq!(t.w_total().unwrap(), third.w, "W at ({l},{k})");
        }
    }

    #[test]
    fn ratio_examples() {
        let t = build_term_table(2, 1).unwrap();
        assert_eq!(t.b4[1].ratio(&t.b3[0]).unwrap(), rat(4, 15));
        assert_eq!(t.c4[1].ratio(&t.c3[0]).unwrap(), rat(20, 7));
    }

    #[test]
    fn main_terms_reproduce_exact_values() {
        assert_eq!(main_terms_ratio(2, 1).unwrap(), rat(1531, 23205));
        assert_eq!(main_terms_ratio(2, 2).unwrap(), rat(203341, 759220));
        assert_eq!(Rational::one() + nu(2), rat(333, 16720));
        assert_eq!(Rational::one() + nu(1), rat(-169, 616));
    }

    #[test]
    fn certificates_verify_and_recheck() {
        for c in [
            check_prop_infinitesimal(2, 1).unwrap(),
            check_prop_infinitesimal(3, 2).unwrap(),
            check_main_terms(2, 1).unwrap(),
            check_main_terms(3, 1).unwrap(),
            check_k1_w(2).unwrap(),
            check_k1_w(5).unwrap(),
            check_w_bounds(2, 2).unwrap(),
            certify_instance(2, 1).unwrap(),
            check_product_identity(4, &rat(1, 4)),
        ] {
            assert!(c.verdict, "{}: {:?}", c.claim, c.failed_checks());
            c.recheck().unwrap();
        }
    }

    #[test]
    fn tails_at_original_indices() {
        let c = check_general_tail(TailLemma::W2W1, 2, 8).unwrap();
        assert!(c.verdict, "{:?}", c.failed_checks());
        assert!((c.float_hint.unwrap() - 0.9169).abs() < 5e-4);
        let c = check_general_tail(TailLemma::Approx1, 10, 8).unwrap();
        assert!(c.verdict, "{:?}", c.failed_checks());
        assert!((c.float_hint.unwrap() - 0.3338).abs() < 1e-3);
        let c = check_general_tail(TailLemma::Approx2, 10, 8).unwrap();
        assert!(c.verdict, "{:?}", c.failed_checks());
    }

    #[test]
    fn loose_bound_is_inconclusive_not_refuted() {
        let c = check_general_tail(TailLemma::W2W1, 1, 8).unwrap();
        assert_eq!(c.status, Status::Inconclusive);
        c.recheck().unwrap();
    }

    #[test]
    fn lemma_names() {
        assert_eq!(TailLemma::parse("approx1").unwrap(), TailLemma::Approx1);
        assert_eq!(TailLemma::parse("nu_2").unwrap(), TailLemma::NuK(2));
        assert!(TailLemma::parse("bogus").is_err());
    }
}
