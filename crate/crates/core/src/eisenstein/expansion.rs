//! Assembly of truncated q-expansions `E_{k,m} = Theta_{mS} + sum beta q^n zeta^lambda`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{DualVector, Lattice};
use crate::qexp::{Coefficient, Entry, Origin, QExpansion};
use crate::arith::Rational;

use super::coefficients::{beta_na1, coefficient_unimodular, GeneralEvaluator};
use super::series::{check_weight, integral_na1_vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Auto,
    Unimodular,
    Na1,
    General,
}

impl std::str::FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Pipeline::Auto),
            "unimodular" => Ok(Pipeline::Unimodular),
            "na1" => Ok(Pipeline::Na1),
            "general" => Ok(Pipeline::General),
            other => Err(Error::InvalidInput(format!("unknown pipeline {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpansionOptions {
    pub pipeline: Pipeline,
    /// Truncation of the `N_a` series where a truncated series is used.
    pub a_max: u64,
    /// Truncation of the `c`-sum of the general pipeline.
    pub c_max: u64,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self {
            pipeline: Pipeline::Auto,
            a_max: 50,
            c_max: 40,
        }
    }
}

/// The pipeline that `Auto` dispatches to, after checking compatibility.
fn resolve_pipeline(lattice: &Lattice, m: u64, requested: Pipeline) -> Result<Pipeline> {
    let unimodular_ok = m == 1 && lattice.is_unimodular() && lattice.rank().is_multiple_of(8);
    let na1_ok = m == 1 && lattice.is_na1() && lattice.rank() >= 4 && lattice.rank().is_multiple_of(2);
    match requested {
        Pipeline::Auto if unimodular_ok => Ok(Pipeline::Unimodular),
        Pipeline::Auto if na1_ok => Ok(Pipeline::Na1),
        Pipeline::Auto | Pipeline::General => Ok(Pipeline::General),
        Pipeline::Unimodular if unimodular_ok => Ok(Pipeline::Unimodular),
        Pipeline::Na1 if na1_ok => Ok(Pipeline::Na1),
        Pipeline::Unimodular => Err(Error::UnsupportedLattice(format!(
            "the unimodular pipeline needs an even unimodular lattice of rank divisible by 8 and m = 1, got {} with m = {m}",
            lattice.name()
        ))),
        Pipeline::Na1 => Err(Error::UnsupportedLattice(format!(
            "the N A_1 pipeline needs Gram matrix 2 I of even rank >= 4 and m = 1, got {} with m = {m}",
            lattice.name()
        ))),
    }
}

/// Whether `lam` lies in `m L`.
fn in_scaled_lattice(lam: &DualVector, m: u64) -> bool {
    lam.as_integer()
        .map(|x| x.iter().all(|v| v.is_multiple_of(&(m as i64))))
        .unwrap_or(false)
}

/// Coordinates of `lam` reduced modulo `m L`; `beta` depends only on these and `Delta`.
fn class_mod_scaled(lam: &DualVector, m: u64) -> Vec<Rational> {
    let modulus = Rational::from_integer(BigInt::from(m));
    lam.coords()
        .into_iter()
        .map(|c| {
            let q = (&c / &modulus).floor();
            c - q * &modulus
        })
        .collect()
}

/// The theta series `Theta_{mS}(tau, z) = sum_{x in L} q^{m q(x)} zeta^{m x}` up to `q^{n_max}`.
pub fn theta_coefficients(lattice: &Lattice, m: u64, n_max: u64) -> Result<QExpansion> {
    if m == 0 {
        return Err(Error::InvalidInput("index m must be at least 1".into()));
    }
    let mut out = QExpansion::new(lattice, None, m, n_max);
    for (qv, xs) in lattice.enumerate_by_norm(n_max / m) {
        for x in xs {
            let lam = DualVector::from_integer(&x).scale(m as i64);
            out.entries.insert(
                (m * qv, lam),
                Entry {
                    delta: Rational::zero(),
                    coeff: Coefficient::Exact(Rational::from_integer(BigInt::from(1))),
                    origin: Origin::Theta,
                },
            );
        }
    }
    Ok(out)
}

/// All coefficients `c(n, lambda)` of `E_{k,m}` with `n <= n_max` and `Delta = m n - q(lambda) >= 0`.
pub fn q_expansion(lattice: &Lattice, k: i64, m: u64, n_max: u64, options: ExpansionOptions) -> Result<QExpansion> {
    check_weight(k, lattice.rank())?;
    if m == 0 {
        return Err(Error::InvalidInput("index m must be at least 1".into()));
    }
    if lattice.rank() % 2 == 1 {
        return Err(Error::OddRankUnsupported { rank: lattice.rank() });
    }
    let pipeline = resolve_pipeline(lattice, m, options.pipeline)?;
    let general = match pipeline {
        Pipeline::General => Some(GeneralEvaluator::new(lattice, k, m, options.c_max)?),
        _ => None,
    };
    let mut cache: HashMap<(Rational, Vec<Rational>), Coefficient> = HashMap::new();
    let mut out = QExpansion::new(lattice, Some(k), m, n_max);
    let bound = Rational::from_integer(BigInt::from(m * n_max));
    let m_rat = Rational::from_integer(BigInt::from(m));
    for (norm, lam) in lattice.enumerate_dual(&bound)? {
        let n_min = (&norm / &m_rat).ceil().to_integer().to_u64().unwrap_or(0);
        for n in n_min..=n_max {
            let delta = Rational::from_integer(BigInt::from(m * n)) - &norm;
            if delta.is_negative() {
                continue;
            }
            let entry = if delta.is_zero() {
                let one = if in_scaled_lattice(&lam, m) { 1 } else { 0 };
                Entry {
                    delta,
                    coeff: Coefficient::Exact(Rational::from_integer(BigInt::from(one))),
                    origin: Origin::Theta,
                }
            } else {
                let key = match pipeline {
                    Pipeline::Unimodular => (delta.clone(), Vec::new()),
                    _ => (delta.clone(), class_mod_scaled(&lam, m)),
                };
                let coeff = match cache.get(&key) {
                    Some(c) => c.clone(),
                    None => {
                        let c = beta(lattice, k, n as i64, &lam, &delta, pipeline, general.as_ref())?;
                        cache.insert(key, c.clone());
                        c
                    }
                };
                Entry {
                    delta,
                    coeff,
                    origin: Origin::Beta,
                }
            };
            out.entries.insert((n, lam.clone()), entry);
        }
    }
    Ok(out)
}

fn beta(
    lattice: &Lattice,
    k: i64,
    n: i64,
    lam: &DualVector,
    delta: &Rational,
    pipeline: Pipeline,
    general: Option<&GeneralEvaluator>,
) -> Result<Coefficient> {
    match pipeline {
        Pipeline::Unimodular => {
            let d = delta.to_integer().to_i64().expect("integral norm on a unimodular lattice");
            coefficient_unimodular(k, lattice.rank(), d).map(Coefficient::Exact)
        }
        Pipeline::Na1 => {
            let lam2 = integral_na1_vector(lam);
            beta_na1(k, lattice.rank(), n, &lam2).map(Coefficient::Exact)
        }
        _ => {
            let c = general.expect("evaluator built for the general pipeline").coefficient(n, lam)?;
            Ok(Coefficient::Float {
                value: c.value,
                error_bound: c.error_bound + c.imag.abs(),
            })
        }
    }
}
