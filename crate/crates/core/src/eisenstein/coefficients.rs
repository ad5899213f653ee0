//! Individual coefficients: the unimodular closed form, the `N A_1` Euler
//! route (with its truncated counterpart and the printed closed form kept for
//! comparison), and general index `m` by Gauss sums.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::arith::{
    bernoulli, divisor_sigma, factorize, int, kronecker, l_value_negative, mobius, ord_p, rational_to_f64,
    zeta_even, DirichletCharacterMod4, PiRational, Rational,
};
use crate::error::{Error, Result};
use crate::lattice::{na1_gram, validate_lattice, DualVector, Lattice};
use crate::rep_count::{default_ceiling, Decomposition, QuadPoly, ShiftedForm};

use super::series::{check_weight, dirichlet_series, na1_series_integral, na1_two_adic_factor, truncated_series, SeriesMode, SeriesValue};
use super::{gamma_factor, require_pi_free, theorem_prefactor, theorem_prefactor_complex};

/// `-(2k - N) / B_{k-N/2} * sigma_{k-N/2-1}(Delta)` for even unimodular lattices.
pub fn coefficient_unimodular(k: i64, rank: usize, delta: i64) -> Result<Rational> {
    if !rank.is_multiple_of(8) || rank == 0 {
        return Err(Error::RankNotUnimodularEven { rank });
    }
    check_weight(k, rank)?;
    if delta < 1 {
        return Err(Error::DeltaNotPositive { delta: delta.to_string() });
    }
    let big_k = k - rank as i64 / 2;
    Ok(-int(2 * k - rank as i64) / bernoulli(big_k as usize) * divisor_sigma(big_k - 1, delta as u64))
}

/// `P(Delta) / zeta(k - N) * D(Q)` with the exact Euler product, as a
/// [`PiRational`] so that the cancellation of `pi` is checked structurally.
pub fn coefficient_unimodular_via_series(lattice: &Lattice, k: i64, n: i64, lam: &DualVector) -> Result<PiRational> {
    let form = ShiftedForm::new(lattice, 1, n, lam.clone())?;
    let series = match dirichlet_series(&form, k, SeriesMode::ExactUnimodular)? {
        SeriesValue::Exact(v) => v,
        SeriesValue::Float { .. } => unreachable!("exact mode"),
    };
    let pref = theorem_prefactor(lattice, k, 1, &form.delta())?;
    Ok(pref / zeta_even((k - lattice.rank() as i64) as usize) * series)
}

fn na1_lattice(rank: usize) -> Result<Lattice> {
    validate_lattice(&format!("{rank}A1"), na1_gram(rank))
}

fn na1_delta(rank: usize, n: i64, lam: &[i64]) -> Result<i64> {
    if lam.len() != rank {
        return Err(Error::DimensionMismatch {
            expected: rank,
            found: lam.len(),
        });
    }
    if rank < 4 || rank % 2 == 1 {
        return Err(Error::UnsupportedRank(format!("N A_1 coefficients need even rank >= 4, got {rank}")));
    }
    let delta4 = 4 * n - lam.iter().map(|v| v * v).sum::<i64>();
    if delta4 <= 0 {
        return Err(Error::DeltaNotPositive { delta: delta4.to_string() });
    }
    Ok(delta4)
}

/// `gamma(k, N, Delta) / zeta(k - N) * sum_a D_a / a^{k-1}` for `N A_1`, with
/// `lam` in `Z^N` and `Delta = 4n - sum lam_i^2`, evaluated exactly.
pub fn coefficient_na1(k: i64, rank: usize, n: i64, lam: &[i64]) -> Result<Rational> {
    check_weight(k, rank)?;
    let delta4 = na1_delta(rank, n, lam)?;
    let gamma = gamma_factor(k, rank, delta4)?;
    let series = na1_series_integral(rank, lam, delta4, k)?;
    require_pi_free(gamma / zeta_even((k - rank as i64) as usize) * series)
}

/// The same quantity with the Dirichlet series truncated at `a_max`; returns
/// `(value, tail estimate)`.
pub fn coefficient_na1_truncated(k: i64, rank: usize, n: i64, lam: &[i64], a_max: u64) -> Result<(f64, f64)> {
    check_weight(k, rank)?;
    let delta4 = na1_delta(rank, n, lam)?;
    let lattice = na1_lattice(rank)?;
    let form = ShiftedForm::new(&lattice, 1, n, DualVector::new(lam.to_vec(), 2))?;
    let (series, tail) = truncated_series(&form, k, a_max)?;
    let scale = gamma_factor(k, rank, delta4)?.to_f64() / zeta_even((k - rank as i64) as usize).to_f64();
    Ok((scale * series, scale.abs() * tail))
}

/// The coefficient of `q^n zeta^{lam/2}` in `E_{k,1}` for `N A_1`, normalised
/// by the index-1 prefactor. It equals `-coefficient_na1`.
pub fn beta_na1(k: i64, rank: usize, n: i64, lam: &[i64]) -> Result<Rational> {
    check_weight(k, rank)?;
    let delta4 = na1_delta(rank, n, lam)?;
    let lattice = na1_lattice(rank)?;
    let pref = theorem_prefactor(&lattice, k, 1, &Rational::new(delta4.into(), 4.into()))?;
    let series = na1_series_integral(rank, lam, delta4, k)?;
    require_pi_free(pref / zeta_even((k - rank as i64) as usize) * series)
}

/// `R_p(Delta)` exactly as printed alongside the closed form, in floating point.
fn printed_r_p(p: u64, delta: i64, rank: usize, k: i64, chi: f64) -> f64 {
    let o = ord_p(delta, p).expect("nonzero") as i32;
    let pf = p as f64;
    let h = rank as f64 / 2.0;
    let x = pf.powf(rank as f64 - k as f64);
    let y = chi * pf.powf(1.0 + h - k as f64);
    let den = 1.0 - chi.powi(1 + o) * pf.powf((o + 1) as f64 * (1.0 - h));
    let t1 = x.powi(o + 1) / (1.0 - x);
    let t2 = ((1.0 - x.powi(o + 1)) / (1.0 - x) - (1.0 - y.powi(o + 1)) / (1.0 - y)) / den;
    let t3 = (1.0 - chi * pf.powf(1.0 - h)) * (1.0 - y.powi(o + 1)) / (den * (1.0 - chi * pf.powf(-h)) * (1.0 - y));
    t1 + t2 + t3
}

/// The closed form for `N A_1` as printed, in both branches `N = 2 mod 4` and
/// `N = 0 mod 4`. Kept to document that it does not reproduce
/// [`coefficient_na1`]; see the tests.
pub fn coefficient_na1_printed_closed_form(k: i64, rank: usize, n: i64, lam: &[i64]) -> Result<f64> {
    check_weight(k, rank)?;
    let delta = na1_delta(rank, n, lam)?;
    let nn = rank as i64;
    let big_k = k - nn / 2;
    let alpha2 = rational_to_f64(&na1_two_adic_factor(rank, lam, delta, k)?);
    let lead = alpha2 * (1.0 - 2f64.powi((nn - k) as i32));
    let df = delta as f64;
    if nn % 4 == 0 {
        let o = ord_p(delta, 2).expect("nonzero");
        let two_o = 2u64.pow(o);
        let sign = if (nn / 4) % 2 == 0 { 1.0 } else { -1.0 };
        let value = lead
            * 2f64.powi(o as i32 * (big_k as i32 - 1))
            * rational_to_f64(&divisor_sigma(big_k - 1, delta as u64))
            * df
            * rational_to_f64(&(divisor_sigma(1 - nn / 2, two_o) / divisor_sigma(big_k - 1, two_o)))
            * sign
            * (2 * k - nn) as f64
            / (2f64.powi((k - 2 - nn / 2) as i32) * rational_to_f64(&bernoulli(big_k as usize)));
        return Ok(value);
    }
    let d_sign = if (nn / 2) % 2 == 0 { 1 } else { -1 };
    let sign = if ((nn - 2) / 4) % 2 == 0 { 1.0 } else { -1.0 };
    let fact = rational_to_f64(&Rational::from_integer(crate::arith::factorial(((2 * k - nn - 2) / 4) as u64)));
    let pre = lead * 2f64.powi((2 - nn / 2) as i32) * sign / fact;
    let divisor_sum: f64 = (1..=delta as u64)
        .filter(|a| (delta as u64).is_multiple_of(*a))
        .map(|a| kronecker(4 * d_sign, a) as f64 * (a as f64).powf(1.0 - nn as f64 / 2.0))
        .sum();
    let l_value = rational_to_f64(&l_value_negative(big_k as usize, DirichletCharacterMod4::Odd));
    let mut prod = 1.0;
    for (p, _) in factorize(delta as u64).into_iter().filter(|(p, _)| *p != 2) {
        let chi = kronecker(d_sign, p) as f64;
        let pf = p as f64;
        let h = nn as f64 / 2.0;
        prod *= (1.0 - chi * pf.powf(-h)) * (1.0 - pf.powf(nn as f64 - k as f64)) / (1.0 - chi * pf.powf(h - k as f64))
            * printed_r_p(p, delta, rank, k, chi);
    }
    Ok(pre * divisor_sum / l_value * df.powf(big_k as f64) * prod)
}

/// A coefficient from the truncated `c`-sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralCoefficient {
    pub value: f64,
    /// Imaginary part of the assembled value; zero up to rounding for even `k`.
    pub imag: f64,
    /// Bound on the neglected terms `c > c_max`.
    pub error_bound: f64,
}

/// `r_c(v) = sum_{d mod c, (d, c) = 1} e(d v / c) = sum_{g | (c, v)} g mu(c / g)`.
fn ramanujan_sums(c: u64) -> Vec<i128> {
    (0..c)
        .map(|v| {
            let g = num_integer::gcd(c, v);
            (1..=g)
                .filter(|d| g % d == 0)
                .map(|d| d as i128 * mobius(c / d) as i128)
                .sum()
        })
        .collect()
}

/// Shared state for many coefficients of one `E_{k,m}`: the Jordan splittings
/// of `m q` modulo every prime power up to `c_max` and the Ramanujan sums.
///
/// The coefficient is `P(Delta) sum_{c <= c_max} c^{-k} S(c)` with
/// `S(c) = sum_{d mod c}^* sum_{x mod c} e(d Q(x) / c)` for
/// `Q(x) = m q(x) - (lambda, x) + n`; since `S(c) = sum_v #{Q = v mod c} r_c(v)`
/// it is an exact integer computed from value histograms.
pub struct GeneralEvaluator {
    lattice: Lattice,
    k: i64,
    m: u64,
    c_max: u64,
    splittings: HashMap<u64, Decomposition>,
    factors: Vec<Vec<u64>>,
    ramanujan: Vec<Vec<i128>>,
}

impl GeneralEvaluator {
    pub fn new(lattice: &Lattice, k: i64, m: u64, c_max: u64) -> Result<Self> {
        check_weight(k, lattice.rank())?;
        if lattice.rank() % 2 == 1 {
            return Err(Error::OddRankUnsupported { rank: lattice.rank() });
        }
        if m == 0 || c_max == 0 {
            return Err(Error::InvalidInput("m and c_max must be at least 1".into()));
        }
        let quad = QuadPoly::from_gram(lattice.gram(), m as i64);
        let mut splittings = HashMap::new();
        let mut factors = vec![Vec::new()];
        let mut work: u128 = 0;
        for c in 1..=c_max {
            let mut qs = Vec::new();
            for (p, e) in factorize(c) {
                let q = p.pow(e);
                qs.push(q);
                if let std::collections::hash_map::Entry::Vacant(slot) = splittings.entry(q) {
                    let d = Decomposition::new(&quad, p, e);
                    work += d.work();
                    slot.insert(d);
                }
            }
            work += c as u128 * qs.len() as u128;
            factors.push(qs);
        }
        let ceiling = default_ceiling();
        if work > ceiling as u128 {
            return Err(Error::BudgetExceeded { needed: work, ceiling });
        }
        let ramanujan = (0..=c_max).map(|c| if c == 0 { vec![] } else { ramanujan_sums(c) }).collect();
        Ok(Self {
            lattice: lattice.clone(),
            k,
            m,
            c_max,
            splittings,
            factors,
            ramanujan,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// `S(c)` for `c = 1..=c_max`.
    pub fn gauss_sums(&self, n: i64, lam: &DualVector) -> Result<Vec<i128>> {
        let s_lam = lam.s_lambda(&self.lattice)?;
        let lin: Vec<i128> = s_lam.iter().map(|&v| -(v as i128)).collect();
        let hists: HashMap<u64, Vec<u128>> = self
            .splittings
            .iter()
            .map(|(&q, d)| (q, d.histogram(&lin, n as i128)))
            .collect();
        Ok((1..=self.c_max)
            .map(|c| {
                let qs = &self.factors[c as usize];
                let r = &self.ramanujan[c as usize];
                (0..c)
                    .map(|v| {
                        let count: u128 = qs.iter().map(|q| hists[q][(v % q) as usize]).product();
                        count as i128 * r[v as usize]
                    })
                    .sum()
            })
            .collect())
    }

    pub fn coefficient(&self, n: i64, lam: &DualVector) -> Result<GeneralCoefficient> {
        let delta = Rational::from_integer(BigInt::from(self.m as i64 * n)) - lam.norm(&self.lattice);
        if !delta.is_positive() {
            return Err(Error::DeltaNotPositive { delta: delta.to_string() });
        }
        let pref = theorem_prefactor_complex(&self.lattice, self.k, self.m, &delta)?;
        let sums = self.gauss_sums(n, lam)?;
        let partial: f64 = sums
            .iter()
            .enumerate()
            .rev()
            .map(|(i, &s)| s as f64 / ((i + 1) as f64).powi(self.k as i32))
            .sum();
        let value = pref * partial;
        let rank = self.lattice.rank() as i32;
        let tail = pref.norm() * (self.c_max as f64).powi(rank + 2 - self.k as i32) / (self.k as f64 - rank as f64 - 2.0);
        Ok(GeneralCoefficient {
            value: value.re,
            imag: value.im,
            error_bound: tail,
        })
    }
}

/// The coefficient of `q^n zeta^lambda` in `E_{k,m}`, from the `c`-sum truncated at `c_max`.
pub fn coefficient_general_m(
    k: i64,
    m: u64,
    lattice: &Lattice,
    n: i64,
    lam: &DualVector,
    c_max: u64,
) -> Result<GeneralCoefficient> {
    GeneralEvaluator::new(lattice, k, m, c_max)?.coefficient(n, lam)
}
