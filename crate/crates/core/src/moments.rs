//! Exact and numeric values of the moments `I(i, j) = ∫_0^Ω Sn^i Cs^j dθ`.
//!
//! For even `i, j` the moment is a Gamma-function ratio. Shifting every Gamma
//! argument down to its fractional residue with `Γ(z+1) = zΓ(z)` leaves a
//! rational coefficient times a positive base that depends only on
//! `(l, i mod 2, j mod 2l)`. Sums of moments that share a base are therefore
//! exact rationals, and their signs are the signs of those rationals.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gtrig::GenTrig;
use crate::quad;
use crate::rational::{self, int, rat, Rational};
use crate::special::gamma;
use crate::trigpoly::TrigPolynomial;

/// The positive transcendental factor
/// `B = 2 l^{-(i0+1)/2} Γ((i0+1)/2) Γ((j0+1)/(2l)) / Γ((i0+1)/2 + (j0+1)/(2l))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MomentBase {
    pub l: u32,
    pub i0: u32,
    pub j0: u32,
}

impl MomentBase {
    pub fn new(l: u32, i0: u32, j0: u32) -> Result<Self> {
        if l == 0 || i0 > 1 || j0 >= 2 * l {
            return Err(Error::Domain(format!("invalid moment base (l={l}, i0={i0}, j0={j0})")));
        }
        Ok(MomentBase { l, i0, j0 })
    }

    /// Base that the moment `I(i, j)` reduces to.
    pub fn of(l: u32, i: u32, j: u32) -> Self {
        MomentBase { l, i0: i % 2, j0: j % (2 * l) }
    }

    pub fn value(&self) -> f64 {
        let l = self.l as f64;
        let a = (self.i0 as f64 + 1.0) / 2.0;
        let b = (self.j0 as f64 + 1.0) / (2.0 * l);
        2.0 * l.powf(-a) * gamma(a) * gamma(b) / gamma(a + b)
    }
}

impl fmt::Display for MomentBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B[l={}](i0={}, j0={})", self.l, self.i0, self.j0)
    }
}

/// `coeff × B(base)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactMoment {
    #[serde(with = "rational_serde")]
    pub coeff: Rational,
    pub base: MomentBase,
}

/// Serde adapter storing a [`Rational`] as numerator/denominator strings.
pub mod rational_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::rational::{Rational, RationalRepr};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        RationalRepr::from(q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let r = RationalRepr::deserialize(d)?;
        Rational::try_from(&r).map_err(serde::de::Error::custom)
    }
}

impl ExactMoment {
    pub fn zero(base: MomentBase) -> Self {
        ExactMoment { coeff: Rational::zero(), base }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// -1, 0 or 1. The base is positive so this is the sign of the moment.
    pub fn signum(&self) -> i32 {
        if self.coeff.is_zero() {
            0
        } else if self.coeff.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.coeff.is_zero() {
            0.0
        } else {
            rational::to_f64(&self.coeff) * self.base.value()
        }
    }

    fn compatible(&self, other: &Self) -> Result<MomentBase> {
        if self.base == other.base || other.is_zero() {
            Ok(self.base)
        } else if self.is_zero() {
            Ok(other.base)
        } else {
            Err(Error::BaseMismatch(self.base, other.base))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let base = self.compatible(other)?;
        Ok(ExactMoment { coeff: &self.coeff + &other.coeff, base })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let base = self.compatible(other)?;
        Ok(ExactMoment { coeff: &self.coeff - &other.coeff, base })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        ExactMoment { coeff: &self.coeff * c, base: self.base }
    }

    pub fn neg(&self) -> Self {
        ExactMoment { coeff: -&self.coeff, base: self.base }
    }

    /// Exact `self / other` when both share a base.
    pub fn ratio(&self, other: &Self) -> Result<Rational> {
        if other.is_zero() {
            return Err(Error::Domain("ratio by a zero moment".into()));
        }
        self.compatible(other)?;
        Ok(&self.coeff / &other.coeff)
    }
}

impl fmt::Display for ExactMoment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} × {}", rational::display(&self.coeff), self.base)
    }
}

/// Generalized multifactorial `a!_(n) = a (a-n) (a-2n) ...`, stopping at the
/// first non-positive factor (which is replaced by 1).
pub fn gen_factorial(a: &Rational, n: u32) -> Rational {
    assert!(n > 0, "multifactorial step must be positive");
    let step = int(n as i64);
    let mut acc = Rational::one();
    let mut x = a.clone();
    while x.is_positive() {
        acc *= &x;
        x -= &step;
    }
    acc
}

/// Integer-argument convenience for [`gen_factorial`]; negative `a` gives 1.
pub fn gen_factorial_int(a: i64, n: u32) -> Rational {
    gen_factorial(&int(a), n)
}

/// Exact `I(i, j)` for even `i` and `j`.
pub fn moment_exact(l: u32, i: u32, j: u32) -> Result<ExactMoment> {
    if l == 0 {
        return Err(Error::Domain("l must be >= 1".into()));
    }
    if i % 2 != 0 || j % 2 != 0 {
        return Err(Error::Parity { i, j, expected: "both exponents even" });
    }
    let base = MomentBase::of(l, i, j);
    let two_l = 2 * l as i64;
    let half = rat(1, 2);
    let beta = rat(base.j0 as i64 + 1, two_l);
    let a = i / 2;
    let b = (j - base.j0) / (2 * l);

    let mut coeff = Rational::one() / rational::pow(&int(l as i64), a);
    for t in 0..a {
        coeff *= &half + int(t as i64);
    }
    for t in 0..b {
        coeff *= &beta + int(t as i64);
    }
    let shift = &half + &beta;
    for t in 0..(a + b) {
        coeff /= &shift + int(t as i64);
    }
    Ok(ExactMoment { coeff, base })
}

/// The exact zero that `I(i, j)` equals when `i` or `j` is odd.
pub fn moment_zero(l: u32, i: u32, j: u32) -> Result<ExactMoment> {
    if l == 0 {
        return Err(Error::Domain("l must be >= 1".into()));
    }
    if i % 2 == 0 && j % 2 == 0 {
        return Err(Error::Parity { i, j, expected: "at least one odd exponent" });
    }
    Ok(ExactMoment::zero(MomentBase::of(l, i, j)))
}

/// `I(i, j)` for any exponents.
pub fn moment(l: u32, i: u32, j: u32) -> Result<ExactMoment> {
    if i % 2 == 0 && j % 2 == 0 {
        moment_exact(l, i, j)
    } else {
        moment_zero(l, i, j)
    }
}

/// `∫_0^Ω p(θ) dθ` as one exact moment. Fails when non-zero terms land on
/// different bases.
pub fn integrate_poly(l: u32, p: &TrigPolynomial) -> Result<ExactMoment> {
    let mut acc: Option<ExactMoment> = None;
    for (c, i, j) in p.terms() {
        let term = moment(l, i, j)?.scale(c);
        acc = Some(match acc {
            None => term,
            Some(a) => a.checked_add(&term)?,
        });
    }
    Ok(acc.unwrap_or_else(|| ExactMoment::zero(MomentBase::of(l, 0, 0))))
}

/// Adaptive Gauss–Kronrod quadrature of `Sn^i Cs^j` over one period.
pub fn moment_quad(trig: &GenTrig, i: u32, j: u32, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive (got {tol})")));
    }
    let (ii, jj) = (i as i32, j as i32);
    let omega = trig.period();
    let pieces = 8;
    let mut total = 0.0;
    for p in 0..pieces {
        let a = omega * p as f64 / pieces as f64;
        let b = omega * (p + 1) as f64 / pieces as f64;
        let r = quad::integrate(
            |t| {
                let (cs, sn) = trig.at(t);
                sn.powi(ii) * cs.powi(jj)
            },
            a,
            b,
            tol / pieces as f64,
            0.0,
        )?;
        total += r.value;
    }
    Ok(total)
}

/// One application of the reduction `∫Sn^i Cs^j = -Sn^{i-1}Cs^{j+1}/d + (i-1)/d ∫Sn^{i-2}Cs^j`,
/// `d = (i-1) l + j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionStep {
    pub sn: u32,
    pub cs: u32,
    pub denominator: Rational,
    /// Factor carried onto the next, lower integral.
    pub carry: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Antiderivative {
    pub sn: u32,
    pub cs: u32,
    pub poly: TrigPolynomial,
    pub chain: Vec<ReductionStep>,
}

/// Closed-form antiderivative of `Sn^i Cs^j` for odd `i`, obtained by applying
/// the reduction in `i` until the `Sn Cs^j` integral `-Cs^{j+1}/(j+1)`.
pub fn antiderivative_odd_i(l: u32, i: u32, j: u32) -> Result<Antiderivative> {
    if i % 2 == 0 {
        return Err(Error::Parity { i, j, expected: "odd Sn exponent" });
    }
    let mut poly = TrigPolynomial::new();
    let mut chain = Vec::new();
    let mut mult = Rational::one();
    let mut cur = i;
    loop {
        let denominator = int(((cur - 1) * l + j + 1) as i64);
        poly.add_term(-(&mult / &denominator), cur - 1, j + 1);
        let carry = int((cur - 1) as i64) / &denominator;
        chain.push(ReductionStep { sn: cur, cs: j, denominator, carry: carry.clone() });
        if cur == 1 {
            break;
        }
        mult *= carry;
        cur -= 2;
    }
    Ok(Antiderivative { sn: i, cs: j, poly, chain })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multifactorials() {
        assert_eq!(gen_factorial_int(5, 2), int(15));
        assert_eq!(gen_factorial_int(9, 4), int(45));
        assert_eq!(gen_factorial_int(0, 3), int(1));
        assert_eq!(gen_factorial_int(-2, 1), int(1));
        assert_eq!(gen_factorial_int(7, 6), int(7));
        // (k + 1/2)! with k = 1
        assert_eq!(gen_factorial(&rat(3, 2), 1), rat(3, 4));
    }

    #[test]
    fn zero_exponents_give_the_period() {
        let m = moment_exact(2, 0, 0).unwrap();
        assert_eq!(m.coeff, int(1));
        assert_eq!(m.base, MomentBase { l: 2, i0: 0, j0: 0 });
        assert!((m.to_f64() - 7.416_298_709_205_488).abs() < 1e-12);
    }

    #[test]
    fn parity_errors_and_zeros() {
        assert!(moment_exact(2, 1, 4).is_err());
        assert!(moment_zero(2, 2, 4).is_err());
        assert!(moment_zero(2, 1, 4).unwrap().is_zero());
        assert!(moment_zero(2, 2, 3).unwrap().is_zero());
        assert!(moment_zero(2, 3, 3).unwrap().is_zero());
    }

    #[test]
    fn recurrence_ratio_example() {
        let hi = moment_exact(3, 4, 2).unwrap();
        let lo = moment_exact(3, 2, 2).unwrap();
        assert_eq!(hi.ratio(&lo).unwrap(), rat(1, 4));
    }

    #[test]
    fn base_mismatch_is_an_error() {
        let a = moment_exact(2, 0, 0).unwrap();
        let b = moment_exact(2, 0, 2).unwrap();
        assert!(matches!(a.checked_add(&b), Err(Error::BaseMismatch(..))));
        let z = ExactMoment::zero(b.base);
        assert_eq!(a.checked_add(&z).unwrap(), a);
        assert!(a.checked_sub(&a).unwrap().is_zero());
        assert!(a.scale(&Rational::zero()).is_zero());
    }

    #[test]
    fn first_antiderivative_rule() {
        let a = antiderivative_odd_i(2, 1, 5).unwrap();
        assert_eq!(a.poly, TrigPolynomial::monomial(rat(-1, 6), 0, 6));
        assert!(antiderivative_odd_i(2, 2, 5).is_err());
    }

    #[test]
    fn serde_keeps_exact_coefficients() {
        let m = moment_exact(3, 6, 8).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: ExactMoment = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
