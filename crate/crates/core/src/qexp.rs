//! Truncated Fourier expansions `sum c(n, lambda) q^n zeta^lambda`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::arith::{format_rational, parse_rational, Rational};
use crate::error::{Error, Result};
use crate::lattice::{DualVector, Lattice};

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Exact(Rational),
    Float { value: f64, error_bound: f64 },
}

impl Coefficient {
    pub fn to_f64(&self) -> f64 {
        match self {
            Coefficient::Exact(r) => crate::arith::rational_to_f64(r),
            Coefficient::Float { value, .. } => *value,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coefficient::Exact(_))
    }

    fn to_json(&self) -> Value {
        match self {
            Coefficient::Exact(r) => json!({"kind": "rational", "value": format_rational(r)}),
            Coefficient::Float { value, error_bound } => {
                json!({"kind": "float", "value": value, "error_bound": error_bound})
            }
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("malformed coefficient {v}"));
        match v.get("kind").and_then(Value::as_str) {
            Some("rational") => {
                let s = v.get("value").and_then(Value::as_str).ok_or_else(bad)?;
                Ok(Coefficient::Exact(parse_rational(s).ok_or_else(bad)?))
            }
            Some("float") => Ok(Coefficient::Float {
                value: v.get("value").and_then(Value::as_f64).ok_or_else(bad)?,
                error_bound: v.get("error_bound").and_then(Value::as_f64).unwrap_or(0.0),
            }),
            _ => Err(bad()),
        }
    }
}

/// Which part of the expansion produced an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// The singular part: `Delta = 0`.
    Theta,
    /// The `c != 0` part: `Delta > 0`.
    Beta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub delta: Rational,
    pub coeff: Coefficient,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QExpansion {
    pub lattice: String,
    pub weight: Option<i64>,
    pub index: u64,
    pub n_max: u64,
    pub entries: BTreeMap<(u64, DualVector), Entry>,
}

impl QExpansion {
    pub fn new(lattice: &Lattice, weight: Option<i64>, index: u64, n_max: u64) -> Self {
        Self {
            lattice: lattice.name().to_string(),
            weight,
            index,
            n_max,
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, n: u64, lambda: &DualVector) -> Option<&Coefficient> {
        self.entries.get(&(n, lambda.clone())).map(|e| &e.coeff)
    }

    /// Sum of the coefficients of `q^n` over all `lambda`, as a float.
    pub fn row_sum_f64(&self, n: u64) -> f64 {
        self.entries
            .range((n, DualVector::new(vec![], 1))..)
            .take_while(|((k, _), _)| *k == n)
            .map(|(_, e)| e.coeff.to_f64())
            .sum()
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|((n, lam), e)| {
                json!({
                    "n": n,
                    "lambda": lam.to_strings(),
                    "delta": format_rational(&e.delta),
                    "coeff": e.coeff.to_json(),
                })
            })
            .collect();
        let mut obj = json!({
            "lattice": self.lattice,
            "m": self.index,
            "n_max": self.n_max,
            "entries": entries,
        });
        if let Some(k) = self.weight {
            obj["k"] = json!(k);
        }
        obj
    }

    /// Inverse of [`QExpansion::to_json`]; the origin of an entry is recovered from `delta`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::InvalidInput(format!("malformed expansion: {what}"));
        let mut out = QExpansion {
            lattice: v.get("lattice").and_then(Value::as_str).ok_or_else(|| bad("lattice"))?.to_string(),
            weight: v.get("k").and_then(Value::as_i64),
            index: v.get("m").and_then(Value::as_u64).ok_or_else(|| bad("m"))?,
            n_max: v.get("n_max").and_then(Value::as_u64).ok_or_else(|| bad("n_max"))?,
            entries: BTreeMap::new(),
        };
        for e in v.get("entries").and_then(Value::as_array).ok_or_else(|| bad("entries"))? {
            let n = e.get("n").and_then(Value::as_u64).ok_or_else(|| bad("n"))?;
            let lam: Vec<Rational> = e
                .get("lambda")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("lambda"))?
                .iter()
                .map(|s| s.as_str().and_then(parse_rational).ok_or_else(|| bad("lambda entry")))
                .collect::<Result<_>>()?;
            let delta = e
                .get("delta")
                .and_then(Value::as_str)
                .and_then(parse_rational)
                .ok_or_else(|| bad("delta"))?;
            let coeff = Coefficient::from_json(e.get("coeff").ok_or_else(|| bad("coeff"))?)?;
            let origin = if delta == Rational::from_integer(BigInt::from(0)) {
                Origin::Theta
            } else {
                Origin::Beta
            };
            out.entries
                .insert((n, DualVector::from_rationals(&lam)), Entry { delta, coeff, origin });
        }
        Ok(out)
    }
}
