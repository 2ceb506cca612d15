//! Rigorous rational bounds used to replace floating approximations:
//! truncated exponential series, square and fourth roots, tail bounds for
//! infinite products and a Riemann lower sum.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, int, rat, Rational};

/// Lower bound on `exp(-x)`: `Σ_{i=0}^{M} (x^{2i}/(2i)! - x^{2i+1}/(2i+1)!)`.
///
/// The partial sum ends on an odd degree, so the Lagrange remainder is
/// positive for every `x >= 0`.
pub fn exp_lower(x: &Rational, m: u32) -> Rational {
    partial_exp_neg(x, 2 * m + 1)
}

/// Upper bound on `exp(-x)`: the partial sum through degree `2M + 2`.
pub fn exp_upper(x: &Rational, m: u32) -> Rational {
    partial_exp_neg(x, 2 * m + 2)
}

/// Upper bound on `exp(x)` as `1 / exp_lower(x, M)`; `None` when the series
/// lower bound is not positive (too few terms for this `x`).
pub fn exp_pos_upper(x: &Rational, m: u32) -> Option<Rational> {
    let lo = exp_lower(x, m);
    lo.is_positive().then(|| Rational::one() / lo)
}

/// Lower bound on `exp(x)` as `1 / exp_upper(x, M)`.
pub fn exp_pos_lower(x: &Rational, m: u32) -> Rational {
    Rational::one() / exp_upper(x, m)
}

fn partial_exp_neg(x: &Rational, degree: u32) -> Rational {
    assert!(!x.is_negative(), "exponential bounds need x >= 0");
    let mut term = Rational::one();
    let mut sum = Rational::one();
    for i in 1..=degree {
        term = -(term * x) / int(i as i64);
        sum += &term;
    }
    sum
}

/// Bracket `lo <= sqrt(x) <= hi` by Newton's iteration from above, with
/// outward rounding to dyadic rationals so the sizes stay bounded.
pub fn sqrt_bounds(x: &Rational, iters: u32) -> (Rational, Rational) {
    assert!(x.is_positive(), "sqrt_bounds needs x > 0");
    if let Some(r) = rational::exact_sqrt(x) {
        return (r.clone(), r);
    }
    let bits = (53u32 << iters.min(6)) + 8;
    let guess = rational::to_f64(x).sqrt();
    let mut hi = match rational::from_f64(guess) {
        Some(g) if g.is_positive() => g,
        _ => x.clone().max(Rational::one()),
    };
    for _ in 0..iters.max(1) {
        // (h + x/h)/2 >= sqrt(x) for every h > 0
        hi = rational::round_up(&((&hi + x / &hi) / int(2)), bits);
    }
    let lo = rational::round_down(&(x / &hi), bits);
    (lo, hi)
}

/// Bracket on `x^(1/4)` by composing two square-root brackets.
pub fn root4_bounds(x: &Rational, iters: u32) -> (Rational, Rational) {
    let (lo, hi) = sqrt_bounds(x, iters);
    (sqrt_bounds(&lo, iters).0, sqrt_bounds(&hi, iters).1)
}

/// Weighting of the Riemann sum for `∫_{1/2}^{2} x^{-1/2}(1+x)^{-3/4} dx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiemannRule {
    /// Right endpoints with the panel width `3/(2M)`.
    RightEndpoint,
    /// Right endpoints with weight `1/M` (two thirds of the above; still a lower bound).
    UnitWeight,
}

pub const INTEGRAL_LOWER_LIMIT: (i64, i64) = (1, 2);
pub const INTEGRAL_UPPER_LIMIT: (i64, i64) = (2, 1);

/// Rational lower bound on `∫_{1/2}^{2} x^{-1/2}(1+x)^{-3/4} dx`.
///
/// The integrand is decreasing, so right-endpoint values under-estimate
/// every panel; each value is itself bounded below through root brackets
/// and rounded down.
pub fn riemann_lower(panels: u32, rule: RiemannRule) -> Rational {
    assert!(panels > 0, "need at least one panel");
    let m = panels as i64;
    let mut sum = Rational::zero();
    for i in 1..=m {
        let x = rat(1, 2) + rat(3 * i, 2 * m);
        let sx = sqrt_bounds(&x, 3).1;
        let r4 = root4_bounds(&(Rational::one() + &x), 3).1;
        let term = Rational::one() / (sx * rational::pow(&r4, 3));
        sum += rational::round_down(&term, 128);
    }
    match rule {
        RiemannRule::RightEndpoint => sum * rat(3, 2 * m),
        RiemannRule::UnitWeight => sum / int(m),
    }
}

/// Dense univariate polynomial with rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly(Vec<Rational>);

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    /// `a n + b`.
    pub fn linear(a: i64, b: i64) -> Self {
        Self::from_ints(&[b, a])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(Rational::one()), |acc, _| &acc * self)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// `p(x + c)` by Horner's scheme.
    pub fn shift(&self, c: &Rational) -> Self {
        let step = Poly::new(vec![c.clone(), Rational::one()]);
        self.0
            .iter()
            .rev()
            .fold(Poly::default(), |acc, a| &(&acc * &step) + &Poly::constant(a.clone()))
    }

    /// Sufficient test for `p(n) > 0` for all real `n >= n0`: after the shift
    /// `n = n0 + t` every coefficient is non-negative and the constant is positive.
    pub fn positive_from(&self, n0: u32) -> bool {
        let s = self.shift(&int(n0 as i64));
        match s.0.split_first() {
            Some((c0, rest)) => c0.is_positive() && rest.iter().all(|c| !c.is_negative()),
            None => false,
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        let z = Rational::zero();
        Poly::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) + rhs.0.get(i).unwrap_or(&z)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.0.iter().map(|c| -c).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return Poly::default();
        }
        let mut out = vec![Rational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// A rational sequence `a_n = P(n) / Q(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSequence {
    pub num: Poly,
    pub den: Poly,
}

impl RationalSequence {
    pub fn new(num: Poly, den: Poly) -> Self {
        RationalSequence { num, den }
    }

    pub fn at(&self, n: u32) -> Rational {
        let n = int(n as i64);
        self.num.eval(&n) / self.den.eval(&n)
    }

    /// `lim n² a_n` (requires `deg Q = deg P + 2`).
    pub fn limit_n2(&self) -> Option<Rational> {
        let (dp, dq) = (self.num.degree()?, self.den.degree()?);
        (dq == dp + 2).then(|| self.num.leading() / self.den.leading())
    }

    /// `Π_{n=1}^{N} (1 + sign · a_n)`.
    pub fn partial_product(&self, n_max: u32, sign: i64) -> Rational {
        (1..=n_max).fold(Rational::one(), |acc, n| acc * (Rational::one() + int(sign) * self.at(n)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `Π(1 + a_n) < exp(C/N) Π_{n<=N}(1 + a_n)`.
    Upper,
    /// `Π(1 - a_n) > exp(-C/N) Π_{n<=N}(1 - a_n)`.
    Lower,
}

/// Hypotheses of the infinite-product tail estimate, with `C = ā + ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    #[serde(with = "crate::moments::rational_serde")]
    pub a_bar: Rational,
    #[serde(with = "crate::moments::rational_serde")]
    pub epsilon: Rational,
    pub n: u32,
    pub direction: Direction,
}

/// Outcome of checking a [`TailBound`] against a concrete sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCheck {
    pub ok: bool,
    /// Coefficients in `t` of the polynomial that must stay positive for `n = N+1+t`.
    pub shifted: Vec<Rational>,
    /// `exp(∓C/N)` replaced by a rational bound in the safe direction.
    pub factor: Option<Rational>,
}

impl TailBound {
    pub fn constant(&self) -> Rational {
        &self.a_bar + &self.epsilon
    }

    /// Verifies the hypothesis used by the tail estimate for every `n > N`:
    /// `a_n < C/n²` (upper) or `a_n/(1 - a_n) < C/n²` (lower, which gives
    /// `log(1 - a_n) > -C/n²`), together with `0 <= a_n < 1`.
    pub fn check(&self, seq: &RationalSequence, m: u32) -> TailCheck {
        let c = self.constant();
        let n2 = &Poly::x() * &Poly::x();
        let (p, q) = (&seq.num, &seq.den);
        let target = match self.direction {
            Direction::Upper => &q.scale(&c) - &(&n2 * p),
            Direction::Lower => &(q - p).scale(&c) - &(&n2 * p),
        };
        let from = self.n + 1;
        let denominators_positive = q.positive_from(from);
        let nonneg = p.shift(&int(from as i64)).coeffs().iter().all(|x| !x.is_negative());
        let below_one = match self.direction {
            Direction::Upper => true,
            Direction::Lower => (q - p).positive_from(from),
        };
        let head_ok = (1..=self.n).all(|n| {
            let a = seq.at(n);
            !a.is_negative() && (self.direction == Direction::Upper || a < Rational::one())
        });
        let shifted = target.shift(&int(from as i64)).coeffs().to_vec();
        let tail_ok = target.positive_from(from);
        let x = &c / int(self.n as i64);
        let factor = match self.direction {
            Direction::Upper => exp_pos_upper(&x, m),
            Direction::Lower => Some(exp_lower(&x, m)),
        };
        TailCheck {
            ok: denominators_positive && nonneg && below_one && head_ok && tail_ok && factor.is_some(),
            shifted,
            factor,
        }
    }
}
