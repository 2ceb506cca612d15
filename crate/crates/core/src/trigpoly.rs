//! Polynomials in `Sn` and `Cs` with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{self, int, Rational};

/// Sum of terms `c * Sn^i * Cs^j`, keyed by `(i, j)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrigPolynomial {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl TrigPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn monomial(c: Rational, sn: u32, cs: u32) -> Self {
        let mut p = Self::new();
        p.add_term(c, sn, cs);
        p
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn add_term(&mut self, c: Rational, sn: u32, cs: u32) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((sn, cs)).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(sn, cs));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as `(coefficient, sn exponent, cs exponent)`, ordered by exponents.
    pub fn terms(&self) -> impl Iterator<Item = (&Rational, u32, u32)> {
        self.terms.iter().map(|(&(i, j), c)| (c, i, j))
    }

    pub fn coeff(&self, sn: u32, cs: u32) -> Rational {
        self.terms.get(&(sn, cs)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::new();
        for (k, v) in &self.terms {
            out.add_term(v * c, k.0, k.1);
        }
        out
    }

    /// Derivative in theta, using `Sn' = Cs^(2l-1)` and `Cs' = -Sn`.
    pub fn derivative(&self, l: u32) -> Self {
        let mut out = Self::new();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                out.add_term(c * int(i as i64), i - 1, j + 2 * l - 1);
            }
            if j > 0 {
                out.add_term(-(c * int(j as i64)), i + 1, j - 1);
            }
        }
        out
    }

    /// Canonical form modulo `Cs^(2l) = 1 - l Sn^2`: every Cs exponent below `2l`.
    pub fn reduce(&self, l: u32) -> Self {
        let two_l = 2 * l;
        let mut work: BTreeMap<(u32, u32), Rational> = self.terms.clone();
        let mut out = Self::new();
        while let Some(((i, j), c)) = work.pop_last_by_cs() {
            if j < two_l {
                out.add_term(c, i, j);
            } else {
                let lower = j - two_l;
                for (cc, ii) in [(c.clone(), i), (-(c * int(l as i64)), i + 2)] {
                    let e = work.entry((ii, lower)).or_insert_with(Rational::zero);
                    *e += cc;
                }
            }
        }
        out
    }

    /// Value at theta = 0 where `Sn = 0` and `Cs = 1`.
    pub fn at_origin(&self) -> Rational {
        self.terms
            .iter()
            .filter(|(k, _)| k.0 == 0)
            .fold(Rational::zero(), |acc, (_, c)| acc + c)
    }

    pub fn eval(&self, cs: f64, sn: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| rational::to_f64(c) * sn.powi(i as i32) * cs.powi(j as i32))
            .sum()
    }

    /// Same as [`eval`](Self::eval) with coefficients converted once up front.
    pub fn to_float_terms(&self) -> Vec<(f64, i32, i32)> {
        self.terms
            .iter()
            .map(|(&(i, j), c)| (rational::to_f64(c), i as i32, j as i32))
            .collect()
    }
}

pub fn eval_float_terms(terms: &[(f64, i32, i32)], cs: f64, sn: f64) -> f64 {
    terms.iter().map(|&(c, i, j)| c * sn.powi(i) * cs.powi(j)).sum()
}

trait PopByCs {
    fn pop_last_by_cs(&mut self) -> Option<((u32, u32), Rational)>;
}

impl PopByCs for BTreeMap<(u32, u32), Rational> {
    // Removes the entry with the largest Cs exponent; reduction only ever
    // creates entries with smaller Cs exponents so this terminates.
    fn pop_last_by_cs(&mut self) -> Option<((u32, u32), Rational)> {
        let key = *self.iter().max_by_key(|(k, _)| (k.1, k.0))?.0;
        self.remove(&key).map(|v| (key, v))
    }
}

impl Add for &TrigPolynomial {
    type Output = TrigPolynomial;
    fn add(self, rhs: &TrigPolynomial) -> TrigPolynomial {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(c.clone(), i, j);
        }
        out
    }
}

impl Sub for &TrigPolynomial {
    type Output = TrigPolynomial;
    fn sub(self, rhs: &TrigPolynomial) -> TrigPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &TrigPolynomial {
    type Output = TrigPolynomial;
    fn neg(self) -> TrigPolynomial {
        self.scale(&-Rational::one())
    }
}

impl Mul for &TrigPolynomial {
    type Output = TrigPolynomial;
    fn mul(self, rhs: &TrigPolynomial) -> TrigPolynomial {
        let mut out = TrigPolynomial::new();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term(c1 * c2, i1 + i2, j1 + j2);
            }
        }
        out
    }
}

impl fmt::Display for TrigPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&(i, j), c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", rational::display(c))?;
            if i > 0 {
                write!(f, "·Sn^{i}")?;
            }
            if j > 0 {
                write!(f, "·Cs^{j}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn cancellation_removes_terms() {
        let mut p = TrigPolynomial::monomial(rat(1, 2), 1, 3);
        p.add_term(rat(-1, 2), 1, 3);
        assert!(p.is_zero());
    }

    #[test]
    fn conservation_law_reduces_to_one() {
        let l = 3;
        let mut p = TrigPolynomial::monomial(int(1), 0, 2 * l);
        p.add_term(int(l as i64), 2, 0);
        assert_eq!(p.reduce(l), TrigPolynomial::constant(int(1)));
    }

    #[test]
    fn derivative_of_conserved_quantity_vanishes() {
        let l = 2;
        let mut p = TrigPolynomial::monomial(int(1), 0, 2 * l);
        p.add_term(int(l as i64), 2, 0);
        assert!(p.derivative(l).reduce(l).is_zero());
    }

    #[test]
    fn product_and_origin_value() {
        let a = &TrigPolynomial::monomial(int(2), 0, 1) + &TrigPolynomial::monomial(int(3), 1, 0);
        let b = &TrigPolynomial::monomial(int(1), 0, 1) - &TrigPolynomial::monomial(int(1), 1, 0);
        let prod = &a * &b;
        assert_eq!(prod.coeff(0, 2), int(2));
        assert_eq!(prod.coeff(1, 1), int(1));
        assert_eq!(prod.coeff(2, 0), int(-3));
        assert_eq!(prod.at_origin(), int(2));
        assert!((prod.eval(0.5, 0.25) - (2.0 * 0.25 + 0.125 - 3.0 * 0.0625)).abs() < 1e-15);
    }
}
