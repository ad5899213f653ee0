//! The Dirichlet series `D(Q) = sum_{a >= 1} N_a(Q) / a^{k-1}`.
//!
//! Since `N_a` is multiplicative, `D` is an Euler product whose local factor at
//! `p` is `sum_nu delta_nu x^nu` with `x = p^{N-k}` and `delta_nu = p^{nu(1-N)}
//! N_{p^nu}(Q)`. The densities are eventually constant in `nu`, so every local
//! factor is a finite sum plus a geometric tail. At primes not dividing the
//! hyperbolic norm the factors assemble into ratios of zeta and L-values, and
//! the exact modes return a [`PiRational`].

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{
    factorize, int, l_value_positive, ord_p, pow_rat, zeta_even, DirichletCharacterMod4, PiRational, Rational,
};
use crate::density::{density_na1_odd, density_na1_two, density_unimodular, na1_epsilon};
use crate::error::{Error, Result};
use crate::rep_count::{count_na, ShiftedForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    ExactUnimodular,
    ExactNa1,
    Truncated { a_max: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesValue {
    Exact(PiRational),
    Float { value: f64, tail_bound: f64 },
}

impl SeriesValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            SeriesValue::Exact(v) => v.to_f64(),
            SeriesValue::Float { value, .. } => *value,
        }
    }
}

pub(crate) fn check_weight(k: i64, rank: usize) -> Result<()> {
    if k % 2 != 0 || k <= 2 + rank as i64 {
        return Err(Error::WeightTooSmall { k, rank });
    }
    Ok(())
}

pub fn dirichlet_series(form: &ShiftedForm, k: i64, mode: SeriesMode) -> Result<SeriesValue> {
    check_weight(k, form.lattice().rank())?;
    match mode {
        SeriesMode::Truncated { a_max } => {
            let (value, tail_bound) = truncated_series(form, k, a_max)?;
            Ok(SeriesValue::Float { value, tail_bound })
        }
        SeriesMode::ExactUnimodular => exact_unimodular(form, k).map(SeriesValue::Exact),
        SeriesMode::ExactNa1 => exact_na1(form, k).map(SeriesValue::Exact),
    }
}

/// `sum_{a <= a_max} N_a / a^{k-1}` with the tail estimate
/// `C a_max^{N-k+1} / (k-N-1)`, `C = max_{a <= a_max} N_a / a^{N-1}`.
pub fn truncated_series(form: &ShiftedForm, k: i64, a_max: u64) -> Result<(f64, f64)> {
    if a_max == 0 {
        return Err(Error::InvalidInput("a_max must be at least 1".into()));
    }
    let n = form.lattice().rank() as i32;
    let mut terms = Vec::with_capacity(a_max as usize);
    let mut c_max = 0.0f64;
    for a in 1..=a_max {
        let count = count_na(form, a)? as f64;
        let af = a as f64;
        terms.push(count / af.powi(k as i32 - 1));
        c_max = c_max.max(count / af.powi(n - 1));
    }
    // summing small terms first keeps the rounding error well below the tail
    let value: f64 = terms.iter().rev().sum();
    let tail = c_max * (a_max as f64).powi(n - k as i32 + 1) / (k as f64 - n as f64 - 1.0);
    Ok((value, tail))
}

fn positive_integer_delta(form: &ShiftedForm) -> Result<i64> {
    let delta = form.delta();
    if delta <= Rational::zero() {
        return Err(Error::DeltaNotPositive { delta: delta.to_string() });
    }
    if !delta.is_integer() {
        return Err(Error::UnsupportedLattice(format!("non-integral hyperbolic norm {delta}")));
    }
    delta
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::InvalidInput("hyperbolic norm too large".into()))
}

/// `sum_{nu=0}^{stable} delta_nu x^nu + delta_stable x^{stable+1} / (1 - x)`
/// where `delta_0 = 1` and `delta_nu` is constant from `stable` on.
fn local_factor(x: &Rational, stable: u32, delta: impl Fn(u32) -> Result<Rational>) -> Result<Rational> {
    let mut acc = Rational::one();
    let mut power = Rational::one();
    let mut last = Rational::one();
    for nu in 1..=stable {
        power *= x;
        last = delta(nu)?;
        acc += &last * &power;
    }
    power *= x;
    Ok(acc + last * power / (Rational::one() - x))
}

fn require_index_one(form: &ShiftedForm) -> Result<()> {
    if form.m() != 1 {
        return Err(Error::UnsupportedLattice(format!(
            "closed Euler factors are only available for index 1, got m = {}",
            form.m()
        )));
    }
    Ok(())
}

fn exact_unimodular(form: &ShiftedForm, k: i64) -> Result<PiRational> {
    let lattice = form.lattice();
    require_index_one(form)?;
    let n = lattice.rank() as i64;
    if !lattice.is_unimodular() || n % 8 != 0 {
        return Err(Error::UnsupportedLattice(format!(
            "{} is not an even unimodular lattice",
            lattice.name()
        )));
    }
    let delta = positive_integer_delta(form)?;
    let half = n / 2;
    let mut acc = zeta_even((k - n) as usize) / zeta_even((k - half) as usize);
    for (p, o) in factorize(delta as u64) {
        let pi = p as i64;
        let x = pow_rat(pi, n - k);
        let f = local_factor(&x, o + 1, |nu| density_unimodular(n as usize, p, nu, delta))?;
        let correction = f * (int(1) - pow_rat(pi, n - k)) / (int(1) - pow_rat(pi, half - k));
        acc = acc * PiRational::rational(correction);
    }
    Ok(acc)
}

/// The character `chi` with `L(N/2 + s, chi)` attached to `N A_1`: principal
/// modulo 4 when `N = 0 mod 4`, `chi_{-4}` when `N = 2 mod 4`.
pub fn na1_character(rank: usize) -> DirichletCharacterMod4 {
    DirichletCharacterMod4::from_discriminant_sign(rank.is_multiple_of(4))
}

/// Index of the first `nu` from which `2^{nu(1-N)} D_{2^nu}` is constant.
fn na1_two_adic_threshold(lam: &[i64], delta4: i64) -> u32 {
    if lam.iter().any(|v| v % 2 != 0) {
        1
    } else {
        ord_p(-delta4 / 4, 2).expect("positive norm") + 2
    }
}

/// `alpha_2 = sum_nu 2^{nu(1-N)} D_{2^nu} 2^{nu(N-k)}`, summed in closed form.
pub fn na1_two_adic_factor(rank: usize, lam: &[i64], delta4: i64, k: i64) -> Result<Rational> {
    let x = pow_rat(2, rank as i64 - k);
    let stable = na1_two_adic_threshold(lam, delta4);
    local_factor(&x, stable, |nu| density_na1_two(rank, lam, nu, delta4))
}

/// The exact series for `N A_1` in the integral convention: `lam` in `Z^N`,
/// `delta4 = 4n - sum lam_i^2 > 0`.
pub fn na1_series_integral(rank: usize, lam: &[i64], delta4: i64, k: i64) -> Result<PiRational> {
    check_weight(k, rank)?;
    if rank < 4 || rank % 2 == 1 {
        return Err(Error::UnsupportedRank(format!("N A_1 series needs even rank >= 4, got {rank}")));
    }
    if delta4 <= 0 {
        return Err(Error::DeltaNotPositive { delta: delta4.to_string() });
    }
    let n = rank as i64;
    let half = n / 2;
    let chi = na1_character(rank);
    let alpha2 = na1_two_adic_factor(rank, lam, delta4, k)?;
    let l_value = l_value_positive((k - half) as usize, chi).expect("character parity matches k - N/2");
    let mut acc = zeta_even((k - n) as usize) * PiRational::rational(alpha2 * (int(1) - pow_rat(2, n - k))) / l_value;
    for (p, o) in factorize(delta4 as u64).into_iter().filter(|(p, _)| *p != 2) {
        let pi = p as i64;
        let x = pow_rat(pi, n - k);
        let f = local_factor(&x, o + 1, |nu| density_na1_odd(rank, p, nu, delta4))?;
        let eps = int(na1_epsilon(rank, p));
        let correction = f * (int(1) - pow_rat(pi, n - k)) / (int(1) - eps * pow_rat(pi, half - k));
        acc = acc * PiRational::rational(correction);
    }
    Ok(acc)
}

fn exact_na1(form: &ShiftedForm, k: i64) -> Result<PiRational> {
    let lattice = form.lattice();
    require_index_one(form)?;
    if !lattice.is_na1() {
        return Err(Error::UnsupportedLattice(format!("{} is not N A_1", lattice.name())));
    }
    let lam = integral_na1_vector(form.lam());
    let sq: i64 = lam.iter().map(|v| v * v).sum();
    let delta4 = 4 * form.n() - sq;
    na1_series_integral(lattice.rank(), &lam, delta4, k)
}

/// `2 lambda` for `lambda` in the dual of `N A_1`, which is `(1/2) Z^N`.
pub(crate) fn integral_na1_vector(lam: &crate::lattice::DualVector) -> Vec<i64> {
    let two = BigInt::from(2);
    lam.coords()
        .iter()
        .map(|c| (c * Rational::from_integer(two.clone())).to_integer().to_i64().expect("small coordinates"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{preset, DualVector};

    #[test]
    fn trivial_truncation() {
        let e8 = preset("E8").unwrap();
        let f = ShiftedForm::plain(&e8, 1, 1).unwrap();
        let (v, _) = truncated_series(&f, 12, 1).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn coprime_local_factor_shape() {
        for p in [3i64, 5, 7] {
            let x = pow_rat(p, 8 - 12);
            let f = local_factor(&x, 1, |nu| density_unimodular(8, p as u64, nu, 1)).unwrap();
            assert_eq!(f, (int(1) - pow_rat(p, 4 - 12)) / (int(1) - pow_rat(p, 8 - 12)));
        }
    }

    #[test]
    fn e8_exact_series_is_zeta_ratio_at_unit_norm() {
        let e8 = preset("E8").unwrap();
        let f = ShiftedForm::plain(&e8, 1, 1).unwrap();
        let v = dirichlet_series(&f, 12, SeriesMode::ExactUnimodular).unwrap();
        assert_eq!(v, SeriesValue::Exact(zeta_even(4) / zeta_even(8)));
    }

    #[test]
    fn exact_and_truncated_agree_for_e8() {
        let e8 = preset("E8").unwrap();
        for n in 1..=3 {
            let f = ShiftedForm::plain(&e8, 1, n).unwrap();
            let exact = dirichlet_series(&f, 14, SeriesMode::ExactUnimodular).unwrap().to_f64();
            let (t, tail) = truncated_series(&f, 14, 30).unwrap();
            assert!((exact - t).abs() <= tail, "n={n}: {exact} {t} {tail}");
        }
    }

    #[test]
    fn na1_exact_and_truncated_agree() {
        let l = preset("4A1").unwrap();
        for (lam, n) in [(vec![0, 0, 0, 0], 1), (vec![1, 1, 1, 0], 1), (vec![1, 0, 0, 0], 2), (vec![1, 1, 1, 1], 2)] {
            let dv = DualVector::new(lam.clone(), 2);
            let f = ShiftedForm::new(&l, 1, n, dv).unwrap();
            let exact = dirichlet_series(&f, 10, SeriesMode::ExactNa1).unwrap().to_f64();
            let (t, tail) = truncated_series(&f, 10, 40).unwrap();
            assert!((exact - t).abs() <= tail, "{lam:?}: {exact} {t} {tail}");
        }
    }

    #[test]
    fn two_adic_factor_matches_direct_sum() {
        use crate::rep_count::count_d_na1;
        for (lam, delta4) in [(vec![0i64, 0, 0, 0], 4), (vec![0, 0, 0, 0], 16), (vec![1, 1, 0, 0], 2), (vec![1, 1, 1, 1], 4)] {
            let k = 10;
            let closed = na1_two_adic_factor(4, &lam, delta4, k).unwrap();
            let mut direct = Rational::zero();
            for nu in 0..=9u32 {
                let c = count_d_na1(4, &lam, delta4, 1 << nu).unwrap();
                direct += Rational::from_integer(c.into()) * pow_rat(2, -(nu as i64) * (k - 1));
            }
            let diff = crate::arith::rational_to_f64(&(closed - direct)).abs();
            assert!(diff < 1e-15, "{lam:?} {delta4} {diff}");
        }
    }

    #[test]
    fn exact_modes_reject_unsupported_inputs() {
        let d4 = preset("D4").unwrap();
        let f = ShiftedForm::plain(&d4, 1, 1).unwrap();
        assert!(matches!(dirichlet_series(&f, 8, SeriesMode::ExactUnimodular), Err(Error::UnsupportedLattice(_))));
        assert!(matches!(dirichlet_series(&f, 8, SeriesMode::ExactNa1), Err(Error::UnsupportedLattice(_))));
        let e8 = preset("E8").unwrap();
        let f = ShiftedForm::plain(&e8, 1, 0).unwrap();
        assert!(matches!(dirichlet_series(&f, 12, SeriesMode::ExactUnimodular), Err(Error::DeltaNotPositive { .. })));
        assert!(matches!(dirichlet_series(&f, 10, SeriesMode::ExactUnimodular), Err(Error::WeightTooSmall { .. })));
    }
}
