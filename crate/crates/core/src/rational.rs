//! Helpers around [`BigRational`], the exact arithmetic backbone.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // ToPrimitive only fails on overflow; fall back to a log-scaled quotient.
        let sign = if q.is_negative() { -1.0 } else { 1.0 };
        let n = q.numer().abs();
        let d = q.denom().clone();
        let shift = n.bits() as i64 - d.bits() as i64;
        let scaled = if shift > 0 {
            Rational::new(n, d << shift as usize)
        } else {
            Rational::new(n << (-shift) as usize, d)
        };
        sign * scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

/// Exact rational value of a finite double.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn pow(q: &Rational, e: u32) -> Rational {
    num_traits::pow(q.clone(), e as usize)
}

pub fn factorial(n: u32) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, t| acc * int(t))
}

/// Smallest multiple of `2^-bits` that is `>= q`.
pub fn round_up(q: &Rational, bits: u32) -> Rational {
    let scale = Rational::from_integer(BigInt::one() << bits as usize);
    (q * &scale).ceil() / scale
}

/// Largest multiple of `2^-bits` that is `<= q`.
pub fn round_down(q: &Rational, bits: u32) -> Rational {
    let scale = Rational::from_integer(BigInt::one() << bits as usize);
    (q * &scale).floor() / scale
}

/// Exact square root when both numerator and denominator are perfect squares.
pub fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Parses `p/q`, a bare integer, or a decimal string into an exact rational.
pub fn parse_exact(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| Error::Parse(s.to_string()))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| Error::Parse(s.to_string()))?;
        if d.is_zero() {
            return Err(Error::Parse(s.to_string()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Ok(Rational::from_integer(n));
    }
    Err(Error::Parse(s.to_string()))
}

/// Lossless JSON form of a rational: decimal strings for numerator and denominator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalRepr {
    fn from(q: &Rational) -> Self {
        RationalRepr {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        }
    }
}

impl TryFrom<&RationalRepr> for Rational {
    type Error = Error;

    fn try_from(r: &RationalRepr) -> Result<Rational> {
        parse_exact(&format!("{}/{}", r.num, r.den))
    }
}

pub fn display(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_exact("3/5").unwrap(), rat(3, 5));
        assert_eq!(parse_exact(" -6/10 ").unwrap(), rat(-3, 5));
        assert_eq!(parse_exact("7").unwrap(), int(7));
        assert!(parse_exact("1/0").is_err());
        assert!(parse_exact("0.6").is_err());
    }

    #[test]
    fn dyadic_rounding_brackets() {
        let q = rat(1, 3);
        let lo = round_down(&q, 20);
        let hi = round_up(&q, 20);
        assert!(lo < q && q < hi);
        assert_eq!(&hi - &lo, Rational::new(BigInt::one(), BigInt::one() << 20usize));
        assert_eq!(round_up(&rat(3, 4), 5), rat(3, 4));
    }

    #[test]
    fn exact_sqrt_detects_squares() {
        assert_eq!(exact_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(exact_sqrt(&rat(2, 1)), None);
    }

    #[test]
    fn to_f64_handles_huge_parts() {
        let big = Rational::new(BigInt::one() << 2000usize, (BigInt::one() << 2000usize) * 3);
        assert!((to_f64(&big) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(to_f64(&rat(-3, 8)), -0.375);
    }

    #[test]
    fn repr_round_trip() {
        let q = rat(-1531, 23205);
        let r = RationalRepr::from(&q);
        assert_eq!(Rational::try_from(&r).unwrap(), q);
        assert_eq!(display(&q), "-1531/23205");
        assert_eq!(display(&int(4)), "4");
    }
}
