//! Re-checkable records of exact inequality verifications.
//!
//! A certificate stores named rational witnesses and a list of relations
//! between them. [`Certificate::recheck`] re-evaluates every relation from
//! the witness list alone, without recomputing any moment.

use std::collections::HashMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, int, Rational, RationalRepr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    Refuted,
    /// A one-sided bound was too loose to decide; more terms may settle it.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub name: String,
    pub num: String,
    pub den: String,
}

impl Witness {
    pub fn value(&self) -> Option<Rational> {
        Rational::try_from(&RationalRepr { num: self.num.clone(), den: self.den.clone() }).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Check {
    Positive { a: String },
    NonNegative { a: String },
    Zero { a: String },
    Less { a: String, b: String },
    LessEq { a: String, b: String },
    Equal { a: String, b: String },
    /// `target = Σ c · term`.
    Linear { target: String, terms: Vec<(i64, String)> },
    /// `target = Π factors`.
    Product { target: String, factors: Vec<String> },
    /// `target = num / den`.
    Quotient { target: String, num: String, den: String },
    OddInteger { a: String },
}

impl Check {
    fn eval(&self, w: &HashMap<&str, Rational>) -> Result<bool, String> {
        let get = |n: &String| w.get(n.as_str()).ok_or_else(|| format!("unknown witness {n:?}"));
        Ok(match self {
            Check::Positive { a } => get(a)?.is_positive(),
            Check::NonNegative { a } => !get(a)?.is_negative(),
            Check::Zero { a } => get(a)?.is_zero(),
            Check::Less { a, b } => get(a)? < get(b)?,
            Check::LessEq { a, b } => get(a)? <= get(b)?,
            Check::Equal { a, b } => get(a)? == get(b)?,
            Check::Linear { target, terms } => {
                let mut sum = Rational::zero();
                for (c, n) in terms {
                    sum += int(*c) * get(n)?;
                }
                &sum == get(target)?
            }
            Check::Product { target, factors } => {
                let mut p = Rational::one();
                for n in factors {
                    p *= get(n)?;
                }
                &p == get(target)?
            }
            Check::Quotient { target, num, den } => {
                let d = get(den)?;
                !d.is_zero() && &(get(num)? / d) == get(target)?
            }
            Check::OddInteger { a } => {
                let v = get(a)?;
                v.is_integer() && v.numer().is_odd()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: String,
    pub l: Option<u32>,
    pub k: Option<u32>,
    pub witness: Vec<Witness>,
    pub checks: Vec<Check>,
    pub verdict: bool,
    pub status: Status,
    /// Status reported when some check fails.
    pub on_failure: Status,
    pub float_hint: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Certificate {
    pub fn get(&self, name: &str) -> Option<Rational> {
        self.witness.iter().find(|w| w.name == name).and_then(Witness::value)
    }

    fn evaluate(&self) -> Result<Vec<bool>, String> {
        let mut map = HashMap::new();
        for w in &self.witness {
            let v = w.value().ok_or_else(|| format!("witness {:?} is not a rational", w.name))?;
            map.insert(w.name.as_str(), v);
        }
        self.checks.iter().map(|c| c.eval(&map)).collect()
    }

    /// Checks that failed when re-evaluated from the witness list.
    pub fn failed_checks(&self) -> Vec<&Check> {
        match self.evaluate() {
            Ok(res) => self.checks.iter().zip(res).filter(|(_, ok)| !ok).map(|(c, _)| c).collect(),
            Err(_) => self.checks.iter().collect(),
        }
    }

    /// Re-derives the verdict from the witnesses and compares it with the stored one.
    pub fn recheck(&self) -> Result<(), String> {
        let results = self.evaluate()?;
        let all = results.iter().all(|&b| b);
        let status = if all { Status::Verified } else { self.on_failure };
        if all != self.verdict || status != self.status {
            return Err(format!(
                "{}: stored verdict {}/{:?} but witnesses give {}/{:?}",
                self.claim, self.verdict, self.status, all, status
            ));
        }
        Ok(())
    }
}

pub struct CertBuilder {
    claim: String,
    l: Option<u32>,
    k: Option<u32>,
    witness: Vec<(String, Rational)>,
    checks: Vec<Check>,
    on_failure: Status,
    float_hint: Option<f64>,
    note: Option<String>,
}

impl CertBuilder {
    pub fn new(claim: impl Into<String>) -> Self {
        CertBuilder {
            claim: claim.into(),
            l: None,
            k: None,
            witness: Vec::new(),
            checks: Vec::new(),
            on_failure: Status::Refuted,
            float_hint: None,
            note: None,
        }
    }

    pub fn l(mut self, l: u32) -> Self {
        self.l = Some(l);
        self
    }

    pub fn k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    /// One-sided bounds can only confirm; a failed check then means "inconclusive".
    pub fn inconclusive_on_failure(mut self) -> Self {
        self.on_failure = Status::Inconclusive;
        self
    }

    pub fn float_hint(&mut self, x: f64) {
        self.float_hint = Some(x);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.note = Some(s.into());
    }

    /// Records a witness (replacing an earlier one of the same name) and returns its name.
    pub fn put(&mut self, name: impl Into<String>, value: Rational) -> String {
        let name = name.into();
        if let Some(slot) = self.witness.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = value;
        } else {
            self.witness.push((name.clone(), value));
        }
        name
    }

    pub fn value(&self, name: &str) -> Option<&Rational> {
        self.witness.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn positive(&mut self, name: impl Into<String>, value: Rational) -> String {
        let n = self.put(name, value);
        self.check(Check::Positive { a: n.clone() });
        n
    }

    pub fn less(&mut self, a: &str, b: &str) {
        self.check(Check::Less { a: a.into(), b: b.into() });
    }

    pub fn equal(&mut self, a: &str, b: &str) {
        self.check(Check::Equal { a: a.into(), b: b.into() });
    }

    pub fn finish(self) -> Certificate {
        let mut cert = Certificate {
            claim: self.claim,
            l: self.l,
            k: self.k,
            witness: self
                .witness
                .iter()
                .map(|(n, v)| {
                    let r = RationalRepr::from(v);
                    Witness { name: n.clone(), num: r.num, den: r.den }
                })
                .collect(),
            checks: self.checks,
            verdict: false,
            status: self.on_failure,
            on_failure: self.on_failure,
            float_hint: self.float_hint,
            note: self.note,
        };
        let all = cert.evaluate().map(|r| r.iter().all(|&b| b)).unwrap_or(false);
        cert.verdict = all;
        cert.status = if all { Status::Verified } else { cert.on_failure };
        cert
    }
}

/// Short rendering used in plain-text output.
pub fn summary(c: &Certificate) -> String {
    let params = match (c.l, c.k) {
        (Some(l), Some(k)) => format!(" (l={l}, k={k})"),
        (Some(l), None) => format!(" (l={l})"),
        (None, Some(k)) => format!(" (k={k})"),
        _ => String::new(),
    };
    let hint = c.float_hint.map(|x| format!(", ≈ {x:.6}")).unwrap_or_default();
    format!("{}{}: {:?}{}", c.claim, params, c.status, hint)
}

pub fn witness_display(c: &Certificate, name: &str) -> Option<String> {
    c.get(name).map(|v| rational::display(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn sample() -> Certificate {
        let mut b = CertBuilder::new("demo").l(2).k(1);
        b.put("a", rat(1, 3));
        b.put("b", rat(1, 6));
        b.put("s", rat(1, 2));
        b.check(Check::Linear { target: "s".into(), terms: vec![(1, "a".into()), (1, "b".into())] });
        b.positive("margin", rat(2, 65));
        b.less("b", "a");
        b.finish()
    }

    #[test]
    fn verdict_is_reproducible_from_witnesses() {
        let c = sample();
        assert!(c.verdict);
        assert_eq!(c.status, Status::Verified);
        c.recheck().unwrap();
    }

    #[test]
    fn tampering_is_detected() {
        let mut c = sample();
        c.witness[2].num = "2".into();
        assert!(c.recheck().is_err());
        assert_eq!(c.failed_checks().len(), 1);
    }

    #[test]
    fn inconclusive_mode() {
        let mut b = CertBuilder::new("loose").inconclusive_on_failure();
        b.positive("x", rat(-1, 10));
        let c = b.finish();
        assert!(!c.verdict);
        assert_eq!(c.status, Status::Inconclusive);
        c.recheck().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let c = sample();
        let s = serde_json::to_string(&c).unwrap();
        let back: Certificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        back.recheck().unwrap();
    }
}
