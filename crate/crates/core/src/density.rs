//! Local densities `delta_p(t, L)` and genus representation numbers.
//!
//! `delta_p(t, L) = p^{a(1-N)} #{x mod p^a : q(x) = t mod p^a}` for `a` large
//! enough. [`density_counting`] evaluates this by exact counting and checks
//! that the ratio has stabilised. The closed forms cover primes not dividing
//! `2 det`, the sum of hyperbolic planes (the unimodular case), and the
//! lattice `N A_1` at odd primes and at 2. They are all tested against counting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{
    bernoulli, divisor_sigma, factorize, int, is_perfect_square, is_prime, kronecker, l_value_positive, ord_p,
    pow_rat, rational_to_f64, DirichletCharacterMod4, PiRational, Rational,
};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::qexp::Coefficient;
use crate::rep_count::{count_representations_mod, default_ceiling};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Prime(u64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMethod {
    Counting,
    GoodPrime,
    UnimodularLemma,
    Na1Odd,
    Na1Two,
    Infinity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub value: PiRational,
    pub place: Place,
    pub method: DensityMethod,
    /// The exponent `a` used by counting; `None` for closed forms.
    pub stabilization_exponent: Option<u32>,
}

impl DensityReport {
    pub fn closed(value: Rational, p: u64, method: DensityMethod) -> Self {
        Self {
            value: PiRational::rational(value),
            place: Place::Prime(p),
            method,
            stabilization_exponent: None,
        }
    }

    /// The value when it is rational (every finite place).
    pub fn rational(&self) -> Option<&Rational> {
        self.value.as_rational()
    }
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{p} is not prime")))
    }
}

fn counting_ratio(lattice: &Lattice, p: u64, t: i64, a: u32) -> Result<Rational> {
    let n = lattice.rank() as i64;
    let modulus = p.checked_pow(a).ok_or(Error::BudgetExceeded {
        needed: u128::MAX,
        ceiling: default_ceiling(),
    })?;
    let c = count_representations_mod(lattice, &int(t), modulus, default_ceiling())?;
    Ok(Rational::from_integer(BigInt::from(c)) * pow_rat(p as i64, a as i64 * (1 - n)))
}

/// `delta_p(t, L)` by counting at `a = 2 ord_p(2t) + 1`, re-evaluated at `a + 1`.
pub fn density_counting(lattice: &Lattice, p: u64, t: i64) -> Result<DensityReport> {
    require_prime(p)?;
    if t < 1 {
        return Err(Error::InvalidInput(format!("t = {t} must be positive")));
    }
    let a = 2 * ord_p(2 * t, p).expect("2t is nonzero") + 1;
    let first = counting_ratio(lattice, p, t, a)?;
    let second = counting_ratio(lattice, p, t, a + 1)?;
    if first != second {
        return Err(Error::StabilizationFailure {
            p,
            t,
            level: a,
            next: a + 1,
            first: first.to_string(),
            second: second.to_string(),
        });
    }
    Ok(DensityReport {
        value: PiRational::rational(first),
        place: Place::Prime(p),
        method: DensityMethod::Counting,
        stabilization_exponent: Some(a),
    })
}

fn det_mod(lattice: &Lattice, p: u64) -> i64 {
    (lattice.det() % BigInt::from(p)).to_i64().expect("residue fits")
}

/// `sum_{i<count} r^i`.
fn geometric(r: &Rational, count: u32) -> Rational {
    let mut acc = Rational::zero();
    let mut term = Rational::one();
    for _ in 0..count {
        acc += &term;
        term *= r;
    }
    acc
}

/// Closed form of `delta_p(t, L)` for `p` not dividing `2 det`.
pub fn density_good_prime(lattice: &Lattice, p: u64, t: i64) -> Result<Rational> {
    require_prime(p)?;
    if p == 2 || det_mod(lattice, p) == 0 {
        return Err(Error::BadPrime { p });
    }
    if t < 1 {
        return Err(Error::InvalidInput(format!("t = {t} must be positive")));
    }
    let n = lattice.rank() as i64;
    if n == 1 {
        return Err(Error::UnsupportedRank(
            "rank 1: the odd-rank closed form degenerates, use counting".into(),
        ));
    }
    let l = ord_p(t, p).expect("t is nonzero");
    let pi = p as i64;
    let det = det_mod(lattice, p);
    if n % 2 == 0 {
        let sign = if (n / 2) % 2 == 0 { 1 } else { -1 };
        let eps = kronecker(sign * det, p);
        let lead = int(1) - int(eps) * pow_rat(pi, -n / 2);
        let r = int(eps) * pow_rat(pi, 1 - n / 2);
        return Ok(lead * geometric(&r, l + 1));
    }
    let t_bar = (t / (pi.pow(l))).rem_euclid(pi);
    let sign = if ((n - 1) / 2) % 2 == 0 { 1 } else { -1 };
    let eps = kronecker((sign * 2 * det * t_bar).rem_euclid(pi), p);
    let lead = int(1) - pow_rat(pi, 1 - n);
    let r = pow_rat(pi, 2 - n);
    let tail = |half: u32| {
        pow_rat(pi, (2 - n) * half as i64) / (int(1) - int(eps) * pow_rat(pi, (1 - n) / 2))
    };
    Ok(if l % 2 == 1 {
        lead * geometric(&r, l.div_ceil(2))
    } else {
        lead * (geometric(&r, l / 2) + tail(l / 2))
    })
}

/// The three-case shape shared by the unimodular lemma and the odd-prime
/// proposition for `N A_1`, with `eps` the quadratic character value.
///
/// Written with geometric sums so that `N = 2, eps = 1` (where the printed
/// quotients read `0/0`) is covered by the same expression.
fn hyperbolic_shape(n: i64, p: u64, l: u32, delta: i64, eps: i64) -> Rational {
    let pi = p as i64;
    let h = n / 2;
    let lead = int(1) - int(eps) * pow_rat(pi, -h);
    let r = int(eps) * pow_rat(pi, 1 - h);
    match ord_p(delta, p) {
        Some(0) => lead,
        Some(o) if l > o => lead * geometric(&r, o + 1),
        _ => num_traits::pow(r.clone(), l as usize) + lead * geometric(&r, l),
    }
}

fn require_even_rank(n: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddRankUnsupported { rank: n });
    }
    Ok(())
}

/// `p^{l(1-N)} N_{p^l}(R, Delta)` for an even unimodular `R` of even rank.
pub fn density_unimodular(n: usize, p: u64, l: u32, delta: i64) -> Result<Rational> {
    require_prime(p)?;
    require_even_rank(n)?;
    if l == 0 {
        return Err(Error::InvalidInput("l must be at least 1".into()));
    }
    Ok(hyperbolic_shape(n as i64, p, l, delta, 1))
}

/// `eps(p, N A_1) = ((-1)^{N/2} / p)`.
pub fn na1_epsilon(n: usize, p: u64) -> i64 {
    kronecker(if (n / 2).is_multiple_of(2) { 1 } else { -1 }, p)
}

/// `p^{l(1-N)} D_{p^l}` for `N A_1` at an odd prime.
pub fn density_na1_odd(n: usize, p: u64, l: u32, delta: i64) -> Result<Rational> {
    require_prime(p)?;
    if p == 2 {
        return Err(Error::BadPrime { p });
    }
    require_even_rank(n)?;
    if l == 0 {
        return Err(Error::InvalidInput("l must be at least 1".into()));
    }
    Ok(hyperbolic_shape(n as i64, p, l, delta, na1_epsilon(n, p)))
}

fn minus_one_pow(e: i64) -> Rational {
    if e.rem_euclid(2) == 0 {
        int(1)
    } else {
        int(-1)
    }
}

/// `2^{l(1-N)} D_{2^l}` for `N A_1`. Only the parities of `lam` matter.
pub fn density_na1_two(n: usize, lam: &[i64], l: u32, delta: i64) -> Result<Rational> {
    require_even_rank(n)?;
    if lam.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: lam.len(),
        });
    }
    if l == 0 {
        return Err(Error::InvalidInput("l must be at least 1".into()));
    }
    let sq: i64 = lam.iter().map(|v| v * v).sum();
    if (delta + sq).rem_euclid(4) != 0 {
        return Err(Error::InconsistentInput(format!(
            "Delta = {delta} is not -q(lambda) mod 4 for lambda = {lam:?}"
        )));
    }
    let odd = lam.iter().filter(|v| v.is_odd()).count();
    if odd > 0 && odd < n {
        return Ok(int(1));
    }
    if odd == n {
        let shift = (delta + sq) / 4;
        return Ok(int(1) + minus_one_pow(shift));
    }
    let ni = n as i64;
    let h = ni / 2;
    let kappa = -delta / 4;
    let two = |e: i64| pow_rat(2, e);
    let n_is_0_mod_4 = ni % 4 == 0;
    let sign_n = minus_one_pow(ni / 4);
    Ok(match ord_p(kappa, 2) {
        Some(0) => {
            if l >= 2 && !n_is_0_mod_4 {
                int(1) - minus_one_pow((ni + 2 * kappa) / 4) * two(1 - h)
            } else {
                int(1)
            }
        }
        None => {
            if n_is_0_mod_4 {
                int(1) - sign_n * (int(1) - two((l as i64 - 1) * (1 - h))) / (int(1) - two(h - 1))
            } else {
                int(1)
            }
        }
        Some(o) if l <= o => {
            if n_is_0_mod_4 {
                int(1) - sign_n * (int(1) - two((l as i64 - 1) * (1 - h))) / (int(1) - two(h - 1))
            } else {
                int(1)
            }
        }
        Some(o) if l == o + 1 => {
            if n_is_0_mod_4 {
                let o = o as i64;
                int(1) + sign_n * two(o * (1 - h)) * ((two(o * (h - 1)) - int(1)) / (two(h - 1) - int(1)) - int(2))
            } else {
                int(1)
            }
        }
        Some(o) => {
            let o = o as i64;
            let kb = kappa / 2i64.pow(o as u32);
            if n_is_0_mod_4 {
                int(1) - sign_n * ((int(1) - two((o - 1) * (1 - h))) / (int(1) - two(h - 1)) + two(o * (1 - h)))
            } else {
                int(1) - minus_one_pow((ni + 2 * kb) / 4) * two((o + 1) * (1 - h))
            }
        }
    })
}

fn square_root_of_det(lattice: &Lattice) -> Result<BigInt> {
    is_perfect_square(lattice.det()).ok_or_else(|| Error::IrrationalVolume {
        det: lattice.det().to_string(),
    })
}

/// `delta_infty(t, L) = (2 pi)^{N/2} t^{N/2 - 1} / (Gamma(N/2) sqrt(det))`.
pub fn density_infty(lattice: &Lattice, t: i64) -> Result<PiRational> {
    let n = lattice.rank();
    if n % 2 == 1 {
        return Err(Error::OddRankUnsupported { rank: n });
    }
    if t < 1 {
        return Err(Error::InvalidInput(format!("t = {t} must be positive")));
    }
    let root = square_root_of_det(lattice)?;
    let h = (n / 2) as i64;
    let coeff = pow_rat(2, h) * pow_rat(t, h - 1)
        / (Rational::from_integer(crate::arith::factorial((h - 1) as u64)) * Rational::from_integer(root));
    Ok(PiRational::new(coeff, h as i32))
}

/// `r(Delta, genus(L))`, the weighted number of representations of `Delta`
/// by the genus of `L`.
///
/// Exact for unimodular lattices and whenever `det` is a perfect square, since
/// then `chi_{4D}` is `chi_{+-4}` twisted by a finite set of primes and the
/// powers of `pi` cancel. Otherwise a float with an explicit error bound.
pub fn genus_representation(lattice: &Lattice, delta: i64) -> Result<Coefficient> {
    let n = lattice.rank();
    if n % 2 == 1 || n < 4 {
        return Err(Error::UnsupportedRank(format!("genus representation needs even rank >= 4, got {n}")));
    }
    if delta < 1 {
        return Err(Error::InvalidInput(format!("Delta = {delta} must be positive")));
    }
    let k = (n / 2) as i64;
    if lattice.is_unimodular() {
        let value = -(int(n as i64) / bernoulli(k as usize))
            * pow_rat(delta, k - 1)
            * divisor_sigma(1 - k, delta as u64);
        return Ok(Coefficient::Exact(value));
    }
    match square_root_of_det(lattice) {
        Ok(s) => genus_representation_square(lattice, delta, &s).map(Coefficient::Exact),
        Err(_) => genus_representation_float(lattice, delta, 100_000),
    }
}

fn bad_place_product(lattice: &Lattice, delta: i64) -> Result<Rational> {
    let mut primes: Vec<u64> = factorize(lattice.det().to_u64().ok_or_else(|| {
        Error::UnsupportedLattice("determinant too large".into())
    })?)
    .into_iter()
    .map(|(p, _)| p)
    .collect();
    if !primes.contains(&2) {
        primes.push(2);
    }
    let mut acc = Rational::one();
    for p in primes {
        acc *= density_counting(lattice, p, delta)?
            .rational()
            .cloned()
            .expect("finite densities are rational");
    }
    Ok(acc)
}

fn chi_4d(d_sign: i64, det: &BigInt, a: u64) -> i64 {
    let d = (det * BigInt::from(4 * d_sign) % BigInt::from(4 * a)).to_i64().expect("small residue");
    kronecker(d, a)
}

fn genus_representation_square(lattice: &Lattice, delta: i64, root: &BigInt) -> Result<Rational> {
    let n = lattice.rank();
    let k = (n / 2) as i64;
    let chi = DirichletCharacterMod4::from_discriminant_sign(k % 2 == 0);
    let mut l_value = l_value_positive(k as usize, chi).expect("parity of the character matches N/2");
    let root_u = root.to_u64().ok_or_else(|| Error::UnsupportedLattice("determinant too large".into()))?;
    if root_u > 1 {
        for (p, _) in factorize(root_u).into_iter().filter(|(p, _)| *p != 2) {
            let euler = int(1) - int(chi.value(p as i64)) * pow_rat(p as i64, -k);
            l_value = l_value * PiRational::rational(euler);
        }
    }
    let d_sign = if k % 2 == 0 { 1 } else { -1 };
    let divisor_sum = (1..=delta as u64)
        .filter(|a| (delta as u64).is_multiple_of(*a))
        .map(|a| int(chi_4d(d_sign, lattice.det(), a)) * pow_rat(a as i64, 1 - k))
        .fold(Rational::zero(), |x, y| x + y);
    let value = density_infty(lattice, delta)? / l_value
        * PiRational::rational(divisor_sum * bad_place_product(lattice, delta)?);
    value
        .as_rational()
        .cloned()
        .ok_or_else(|| Error::InconsistentInput(format!("powers of pi did not cancel: {value}")))
}

fn primes_up_to(bound: u64) -> Vec<u64> {
    let b = bound as usize;
    let mut sieve = vec![true; b + 1];
    let mut out = Vec::new();
    for i in 2..=b {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= b {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Float evaluation with `L(N/2, chi_{4D})` as an Euler product over primes
/// up to `prime_bound`. The relative tail of the product is bounded by
/// `exp(2 P^{1-N/2} / (N/2 - 1)) - 1`.
pub fn genus_representation_float(lattice: &Lattice, delta: i64, prime_bound: u64) -> Result<Coefficient> {
    let n = lattice.rank();
    if n % 2 == 1 || n < 4 {
        return Err(Error::UnsupportedRank(format!("genus representation needs even rank >= 4, got {n}")));
    }
    let k = (n / 2) as i64;
    let d_sign = if k % 2 == 0 { 1 } else { -1 };
    let det = lattice.det();
    let mut l_value = 1.0f64;
    for p in primes_up_to(prime_bound) {
        let c = chi_4d(d_sign, det, p) as f64;
        l_value /= 1.0 - c * (p as f64).powi(-(k as i32));
    }
    let det_f = det.to_f64().unwrap_or(f64::INFINITY);
    let h = k as f64;
    let gamma: f64 = (1..k).map(|i| i as f64).product();
    let infty = (2.0 * std::f64::consts::PI).powf(h) * (delta as f64).powf(h - 1.0) / (gamma * det_f.sqrt());
    let divisor_sum: f64 = (1..=delta as u64)
        .filter(|a| (delta as u64).is_multiple_of(*a))
        .map(|a| chi_4d(d_sign, det, a) as f64 * (a as f64).powf(1.0 - h))
        .sum();
    let bad = rational_to_f64(&bad_place_product(lattice, delta)?);
    let value = infty / l_value * divisor_sum * bad;
    let rel = (2.0 * (prime_bound as f64).powf(1.0 - h) / (h - 1.0)).exp_m1();
    Ok(Coefficient::Float {
        value,
        error_bound: value.abs() * rel + 1e-9 * value.abs(),
    })
}

/// `delta_p(t, L)` by the best available method.
pub fn density_report(lattice: &Lattice, p: u64, t: i64) -> Result<DensityReport> {
    if p != 2 && det_mod(lattice, p) != 0 && lattice.rank() > 1 {
        return Ok(DensityReport::closed(density_good_prime(lattice, p, t)?, p, DensityMethod::GoodPrime));
    }
    if lattice.is_na1() && lattice.rank().is_multiple_of(2) {
        let n = lattice.rank();
        let zero = vec![0; n];
        let l = 2 * ord_p(2 * t, p).expect("t nonzero") + 1;
        let value = if p == 2 {
            density_na1_two(n, &zero, l, -4 * t)?
        } else {
            density_na1_odd(n, p, l, -4 * t)?
        };
        let method = if p == 2 { DensityMethod::Na1Two } else { DensityMethod::Na1Odd };
        return Ok(DensityReport::closed(value, p, method));
    }
    density_counting(lattice, p, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::lattice::{d4_gram, preset, validate_lattice};
    use crate::rep_count::{count_d_na1, count_zeros, QuadPoly};
    use proptest::prelude::*;

    fn counted(l: &Lattice, p: u64, t: i64) -> Rational {
        density_counting(l, p, t).unwrap().rational().unwrap().clone()
    }

    fn a2() -> Lattice {
        validate_lattice("A2", vec![vec![2, -1], vec![-1, 2]]).unwrap()
    }

    fn a4() -> Lattice {
        validate_lattice(
            "A4",
            vec![vec![2, -1, 0, 0], vec![-1, 2, -1, 0], vec![0, -1, 2, -1], vec![0, 0, -1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn counting_examples() {
        let e8 = preset("E8").unwrap();
        assert_eq!(counted(&e8, 3, 1), rat(80, 81));
        assert_eq!(counted(&e8, 2, 1), rat(15, 16));
        assert_eq!(counted(&e8, 2, 2), rat(135, 128));
        assert_eq!(density_unimodular(8, 2, 1, 2).unwrap(), rat(17, 16));
        assert_eq!(counted(&preset("4A1").unwrap(), 3, 1), rat(8, 9));
        let r = density_counting(&e8, 2, 1).unwrap();
        assert_eq!(r.stabilization_exponent, Some(3));
        assert_eq!(r.method, DensityMethod::Counting);
    }

    #[test]
    fn good_prime_examples() {
        let e8 = preset("E8").unwrap();
        assert_eq!(density_good_prime(&e8, 3, 1).unwrap(), rat(80, 81));
        let l = preset("4A1").unwrap();
        assert_eq!(density_good_prime(&l, 3, 9).unwrap(), rat(104, 81));
        assert_eq!(counted(&l, 3, 9), rat(104, 81));
        assert!(matches!(density_good_prime(&l, 2, 1), Err(Error::BadPrime { p: 2 })));
        assert!(matches!(density_good_prime(&a2(), 3, 1), Err(Error::BadPrime { p: 3 })));
    }

    #[test]
    fn good_prime_matches_counting() {
        let cases: Vec<(Lattice, Vec<u64>)> = vec![
            (preset("4A1").unwrap(), vec![3, 5, 7]),
            (preset("2A1").unwrap(), vec![3, 5]),
            (preset("3A1").unwrap(), vec![3, 5]),
            (validate_lattice("D4", d4_gram()).unwrap(), vec![3, 5]),
            (a2(), vec![5, 7]),
            (a4(), vec![3, 7]),
        ];
        for (l, primes) in cases {
            for p in primes {
                for t in 1..=36 {
                    if (p as i64).pow(2 * ord_p(2 * t, p).unwrap() + 2) > 1 << 16 {
                        continue;
                    }
                    assert_eq!(density_good_prime(&l, p, t).unwrap(), counted(&l, p, t), "{} p={p} t={t}", l.name());
                }
            }
        }
    }

    #[test]
    fn good_prime_coprime_case_agrees_with_unimodular_lemma() {
        let e8 = preset("E8").unwrap();
        for p in [3u64, 5, 7, 11] {
            for t in 1..=20 {
                if t % p as i64 != 0 {
                    assert_eq!(density_good_prime(&e8, p, t).unwrap(), density_unimodular(8, p, 1, t).unwrap());
                }
            }
        }
    }

    fn hyperbolic_count(n: usize, p: u64, l: u32, delta: i64) -> Rational {
        let m = p.pow(l);
        let poly = QuadPoly::hyperbolic(n).with_linear(vec![0; n], -(delta as i128));
        let c = count_zeros(&poly, m, u64::MAX).unwrap();
        Rational::from_integer(c.into()) * pow_rat(p as i64, l as i64 * (1 - n as i64))
    }

    #[test]
    fn unimodular_lemma_matches_hyperbolic_counts() {
        for n in [2usize, 4, 6] {
            for p in [2u64, 3, 5] {
                for l in 1..=3 {
                    for delta in -36..=36 {
                        assert_eq!(
                            density_unimodular(n, p, l, delta).unwrap(),
                            hyperbolic_count(n, p, l, delta),
                            "n={n} p={p} l={l} delta={delta}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn unimodular_lemma_examples() {
        assert_eq!(density_unimodular(8, 5, 1, 3).unwrap(), rat(624, 625));
        let expected = (int(1) - pow_rat(3, -4)) * (int(1) - pow_rat(3, -6)) / (int(1) - pow_rat(3, -3));
        assert_eq!(density_unimodular(8, 3, 2, 3).unwrap(), expected);
        let e8 = preset("E8").unwrap();
        assert_eq!(density_unimodular(8, 2, 1, 2).unwrap(), hyperbolic_count(8, 2, 1, 2));
        for t in 1..=8 {
            let l = 2 * ord_p(2 * t, 2).unwrap() + 1;
            assert_eq!(density_unimodular(8, 2, l, t).unwrap(), counted(&e8, 2, t), "t={t}");
        }
    }

    fn d_ratio(n: usize, lam: &[i64], delta: i64, p: u64, l: u32) -> Rational {
        let c = count_d_na1(n, lam, delta, p.pow(l)).unwrap();
        Rational::from_integer(c.into()) * pow_rat(p as i64, l as i64 * (1 - n as i64))
    }

    #[test]
    fn na1_odd_examples() {
        assert_eq!(density_na1_odd(4, 3, 1, 1).unwrap(), rat(8, 9));
        assert_eq!(density_na1_odd(2, 5, 1, 1).unwrap(), rat(4, 5));
        assert_eq!(density_na1_odd(4, 3, 1, 9).unwrap(), d_ratio(4, &[1, 1, 1, 0], 9, 3, 1));
    }

    #[test]
    fn na1_odd_matches_counting() {
        for n in [2usize, 4, 6] {
            for p in [3u64, 5, 7] {
                for l in 1..=3u32 {
                    if p.pow(l) > 130 || (n == 6 && p.pow(l) > 30) {
                        continue;
                    }
                    for delta in -36i64..=36 {
                        let lam: Vec<i64> = match delta.rem_euclid(4) {
                            0 => vec![0; n],
                            r => (0..n).map(|i| i64::from(i < 4 - r as usize)).collect(),
                        };
                        if lam.iter().map(|v| v * v).sum::<i64>() % 4 != (-delta).rem_euclid(4) {
                            continue;
                        }
                        assert_eq!(density_na1_odd(n, p, l, delta).unwrap(), d_ratio(n, &lam, delta, p, l), "n={n} p={p} l={l} delta={delta}");
                    }
                }
            }
        }
    }

    #[test]
    fn na1_two_examples_and_errors() {
        assert_eq!(density_na1_two(4, &[1, 0, 1, 0], 3, 2).unwrap(), int(1));
        assert_eq!(density_na1_two(4, &[1, 1, 1, 1], 2, 4).unwrap(), int(2));
        assert_eq!(density_na1_two(4, &[1, 1, 1, 1], 2, 0).unwrap(), int(0));
        assert_eq!(density_na1_two(4, &[0, 0, 0, 0], 3, -4).unwrap(), int(1));
        assert!(matches!(density_na1_two(4, &[0, 0, 0, 0], 3, 2), Err(Error::InconsistentInput(_))));
        assert!(matches!(density_na1_two(3, &[0, 0, 0], 3, 4), Err(Error::OddRankUnsupported { .. })));
    }

    #[test]
    fn na1_two_matches_counting() {
        for n in [2usize, 4, 6] {
            for mask in 0u32..(1 << n) {
                let lam: Vec<i64> = (0..n).map(|i| ((mask >> i) & 1) as i64).collect();
                let sq: i64 = lam.iter().sum();
                for shift in -10..=10 {
                    let delta = 4 * shift - sq;
                    for l in 1..=5u32 {
                        if n == 6 && l > 3 {
                            continue;
                        }
                        assert_eq!(
                            density_na1_two(n, &lam, l, delta).unwrap(),
                            d_ratio(n, &lam, delta, 2, l),
                            "n={n} lam={lam:?} l={l} delta={delta}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rescaled_lattice_densities() {
        for l in [preset("4A1").unwrap(), validate_lattice("D4", d4_gram()).unwrap(), preset("2A1").unwrap()] {
            let doubled: Vec<Vec<i64>> = l.gram().iter().map(|r| r.iter().map(|v| 2 * v).collect()).collect();
            let l2 = validate_lattice("L(2)", doubled).unwrap();
            for t in 1..=6 {
                assert_eq!(counted(&l2, 3, 2 * t), counted(&l, 3, t));
                assert_eq!(counted(&l2, 2, 2 * t), int(2) * counted(&l, 2, t));
            }
        }
    }

    #[test]
    fn infinity_density() {
        let e8 = preset("E8").unwrap();
        assert_eq!(density_infty(&e8, 1).unwrap(), PiRational::new(rat(8, 3), 4));
        let l = preset("4A1").unwrap();
        assert_eq!(density_infty(&l, 1).unwrap(), PiRational::new(int(1), 2));
        for lat in [&e8, &l] {
            let ratio = density_infty(lat, 4).unwrap() / density_infty(lat, 1).unwrap();
            assert_eq!(ratio, PiRational::rational(pow_rat(4, lat.rank() as i64 / 2 - 1)));
        }
        assert!(matches!(density_infty(&preset("3A1").unwrap(), 1), Err(Error::OddRankUnsupported { rank: 3 })));
        assert!(matches!(density_infty(&a2(), 1), Err(Error::IrrationalVolume { .. })));
    }

    fn theta_count(l: &Lattice, t: u64) -> Rational {
        int(l.enumerate_by_norm(t).get(&t).map_or(0, |v| v.len()) as i64)
    }

    #[test]
    fn genus_numbers_of_one_class_genera() {
        let e8 = preset("E8").unwrap();
        assert_eq!(genus_representation(&e8, 1).unwrap(), Coefficient::Exact(int(240)));
        assert_eq!(genus_representation(&e8, 2).unwrap(), Coefficient::Exact(int(2160)));
        for t in 1..=4 {
            assert_eq!(genus_representation(&e8, t as i64).unwrap(), Coefficient::Exact(theta_count(&e8, t)));
        }
        for l in [preset("4A1").unwrap(), validate_lattice("D4", d4_gram()).unwrap()] {
            for t in 1..=8u64 {
                assert_eq!(
                    genus_representation(&l, t as i64).unwrap(),
                    Coefficient::Exact(theta_count(&l, t)),
                    "{} t={t}",
                    l.name()
                );
            }
        }
    }

    #[test]
    fn float_path_agrees_with_exact_path() {
        for l in [preset("4A1").unwrap(), validate_lattice("D4", d4_gram()).unwrap(), preset("6A1").unwrap()] {
            for t in 1..=5 {
                let exact = genus_representation(&l, t).unwrap().to_f64();
                match genus_representation_float(&l, t, 100_000).unwrap() {
                    Coefficient::Float { value, error_bound } => {
                        assert!((value - exact).abs() <= error_bound, "{} t={t}: {value} vs {exact}", l.name());
                        assert!(error_bound < 1e-3 * exact.abs().max(1.0));
                    }
                    other => panic!("expected float, got {other:?}"),
                }
            }
        }
    }

    #[test]
    fn non_square_determinant_uses_float_path() {
        let l = a4();
        for t in 1..=4u64 {
            let c = genus_representation(&l, t as i64).unwrap();
            assert!(!c.is_exact());
            if let Coefficient::Float { value, error_bound } = c {
                assert!((value - rational_to_f64(&theta_count(&l, t))).abs() <= error_bound, "t={t} {value}");
            }
        }
    }

    #[test]
    fn rank_guards() {
        assert!(matches!(genus_representation(&preset("3A1").unwrap(), 1), Err(Error::UnsupportedRank(_))));
        assert!(matches!(genus_representation(&preset("2A1").unwrap(), 1), Err(Error::UnsupportedRank(_))));
        assert!(matches!(density_good_prime(&preset("A1").unwrap(), 3, 1), Err(Error::UnsupportedRank(_))));
    }

    proptest! {
        #[test]
        fn na1_two_depends_on_parities_only(
            lam in proptest::collection::vec(-9i64..=9, 4),
            shift in -6i64..=6,
            l in 1u32..=4,
        ) {
            let sq: i64 = lam.iter().map(|v| v * v).sum();
            let delta = 4 * shift - sq;
            let reduced: Vec<i64> = lam.iter().map(|v| v.rem_euclid(2)).collect();
            let value = density_na1_two(4, &lam, l, delta).unwrap();
            prop_assert_eq!(&value, &density_na1_two(4, &reduced, l, delta).unwrap());
            prop_assert_eq!(value, d_ratio(4, &lam, delta, 2, l));
        }
    }
}
