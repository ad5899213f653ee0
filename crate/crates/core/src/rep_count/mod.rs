//! Exact residue-class counts for the polynomials that drive the Dirichlet
//! series: `N_a(Q)` for shifted forms, the counts `D_a` and `A_N` for the
//! lattice `N A_1`, and the parity combinatorics `alpha` and `omega`.
//!
//! Every count is exact. Work beyond the configured ceiling is refused with
//! [`Error::BudgetExceeded`] instead of being approximated.

pub mod engine;

use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::arith::{binomial, Rational};
use crate::error::{Error, Result};
use crate::lattice::{DualVector, Lattice};

pub use engine::{
    count_zeros, count_zeros_naive, default_ceiling, exponential_sum, value_histogram, Decomposition, QuadPoly,
    DEFAULT_BUDGET,
};

/// `Q(x) = m q(x) - (lambda, x) + n` on `L`, integer valued for `lambda` in the dual.
#[derive(Debug, Clone)]
pub struct ShiftedForm {
    lattice: Lattice,
    m: u64,
    n: i64,
    lam: DualVector,
    s_lam: Vec<i64>,
}

impl ShiftedForm {
    pub fn new(lattice: &Lattice, m: u64, n: i64, lam: DualVector) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("index m must be at least 1".into()));
        }
        let s_lam = lam.s_lambda(lattice)?;
        Ok(Self {
            lattice: lattice.clone(),
            m,
            n,
            lam,
            s_lam,
        })
    }

    /// The unshifted form `m q(x) + n`.
    pub fn plain(lattice: &Lattice, m: u64, n: i64) -> Result<Self> {
        Self::new(lattice, m, n, DualVector::zero(lattice.rank()))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn lam(&self) -> &DualVector {
        &self.lam
    }

    /// `Delta = m n - q(lambda)`.
    pub fn delta(&self) -> Rational {
        Rational::from_integer((self.m as i64 * self.n).into()) - self.lam.norm(&self.lattice)
    }

    pub fn polynomial(&self) -> QuadPoly {
        QuadPoly::from_gram(self.lattice.gram(), self.m as i64)
            .with_linear(self.s_lam.iter().map(|&v| -(v as i128)).collect(), self.n as i128)
    }

    pub fn eval(&self, x: &[i64]) -> i128 {
        self.polynomial().eval(&x.iter().map(|&v| v as i128).collect::<Vec<_>>())
    }
}

/// `N_a(Q) = #{x mod a : Q(x) = 0 mod a}` under the default ceiling.
pub fn count_na(form: &ShiftedForm, a: u64) -> Result<u128> {
    count_na_with_budget(form, a, default_ceiling())
}

pub fn count_na_with_budget(form: &ShiftedForm, a: u64, ceiling: u64) -> Result<u128> {
    count_zeros(&form.polynomial(), a, ceiling)
}

/// The same count by exhaustive enumeration of `(Z/a)^N`.
pub fn count_na_naive(form: &ShiftedForm, a: u64, ceiling: u64) -> Result<u128> {
    count_zeros_naive(&form.polynomial(), a, ceiling)
}

fn sum_of_squares_poly(rank: usize, lin: Vec<i128>, constant: i128) -> QuadPoly {
    QuadPoly {
        half_diag: vec![1; rank],
        off: vec![vec![0; rank]; rank],
        lin,
        constant,
    }
}

/// `D_a = #{x mod a : sum (2x_i - lambda_i)^2 = -Delta mod 4a}`.
///
/// Since `sum (2x - lambda)^2 = sum lambda^2 mod 4`, the count vanishes unless
/// `Delta + sum lambda^2 = 0 mod 4`; otherwise it is the zero count of
/// `sum x_i^2 - lambda . x + (Delta + sum lambda^2)/4` modulo `a`.
pub fn count_d_na1(rank: usize, lam: &[i64], delta: i64, a: u64) -> Result<u128> {
    count_d_na1_with_budget(rank, lam, delta, a, default_ceiling())
}

pub fn count_d_na1_with_budget(rank: usize, lam: &[i64], delta: i64, a: u64, ceiling: u64) -> Result<u128> {
    check_rank(rank, lam.len())?;
    let s: i128 = lam.iter().map(|&v| (v as i128) * (v as i128)).sum();
    let shifted = delta as i128 + s;
    if shifted.rem_euclid(4) != 0 {
        return Ok(0);
    }
    let poly = sum_of_squares_poly(rank, lam.iter().map(|&v| -(v as i128)).collect(), shifted / 4);
    count_zeros(&poly, a, ceiling)
}

/// `A_N(target, p^l) = #{x mod p^l : sum x_i^2 = target mod p^l}`.
pub fn count_sum_squares(rank: usize, target: i64, p: u64, l: u32) -> Result<u128> {
    let modulus = p
        .checked_pow(l)
        .ok_or(Error::BudgetExceeded {
            needed: u128::MAX,
            ceiling: default_ceiling(),
        })?;
    let poly = sum_of_squares_poly(rank, vec![0; rank], -(target as i128));
    count_zeros(&poly, modulus, default_ceiling())
}

fn check_rank(rank: usize, len: usize) -> Result<()> {
    if rank != len {
        return Err(Error::DimensionMismatch {
            expected: rank,
            found: len,
        });
    }
    Ok(())
}

/// The parity weights `(alpha(lambda), omega(lambda))` for `N A_1`.
///
/// `alpha` counts `sigma` in `{0,1}^N` whose weight on the odd entries of
/// `lambda` agrees mod 4 with its weight on the even entries; with `j` even
/// entries this is `sum_r C_4(j, r) C_4(N - j, r)`, where `C_4(n, r)` sums the
/// binomials `C(n, i)` over `i = r mod 4`. `omega` is `C_4(N, -Delta mod 4)`,
/// the number of `sigma` of weight `-Delta` mod 4 (the empty pattern included).
pub fn alpha_omega(rank: usize, lam: &[i64], delta: i64) -> Result<(u64, u64)> {
    check_rank(rank, lam.len())?;
    let n = rank as u64;
    let j = lam.iter().filter(|v| v.is_even()).count() as u64;
    let mut alpha = 0u64;
    for r in 0..4u64 {
        let even_part: u64 = (0..=j).filter(|i| i % 4 == r).map(|i| binomial(j, i)).sum();
        let odd_part: u64 = (0..=n - j)
            .filter(|i| i % 4 == r)
            .map(|i| binomial(n - j, i))
            .sum();
        alpha += even_part * odd_part;
    }
    let target = (-delta).rem_euclid(4) as u64;
    let omega = (0..=n).filter(|i| i % 4 == target).map(|i| binomial(n, i)).sum();
    Ok((alpha, omega))
}

/// `#{x mod p^e : q(x) = t mod p^e}` for the lattice form `q`.
pub fn count_representations_mod(lattice: &Lattice, t: &Rational, modulus: u64, ceiling: u64) -> Result<u128> {
    if !t.is_integer() {
        return Err(Error::InvalidInput(format!("target {t} must be an integer")));
    }
    let t = t
        .to_integer()
        .to_i128()
        .ok_or_else(|| Error::InvalidInput("target too large".into()))?;
    let poly = QuadPoly::from_gram(lattice.gram(), 1).with_linear(vec![0; lattice.rank()], -t);
    count_zeros(&poly, modulus, ceiling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::lattice::{d4_gram, na1_gram, preset, validate_lattice};
    use proptest::prelude::*;

    fn naive_d(rank: usize, lam: &[i64], delta: i64, a: u64) -> u128 {
        let mut count = 0;
        let total = a.pow(rank as u32);
        for idx in 0..total {
            let mut r = idx;
            let mut s: i64 = 0;
            for &l in lam {
                let x = (r % a) as i64;
                r /= a;
                s += (2 * x - l) * (2 * x - l);
            }
            if (s + delta).rem_euclid(4 * a as i64) == 0 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn trivial_modulus() {
        let e8 = preset("E8").unwrap();
        let f = ShiftedForm::plain(&e8, 1, 1).unwrap();
        assert_eq!(count_na(&f, 1).unwrap(), 1);
        assert_eq!(count_sum_squares(4, 7, 5, 0).unwrap(), 1);
    }

    #[test]
    fn e8_mod_2_shifted() {
        let e8 = preset("E8").unwrap();
        let f = ShiftedForm::plain(&e8, 1, 1).unwrap();
        let c = count_na(&f, 2).unwrap();
        assert_eq!(c, 120);
        assert_eq!(count_na_naive(&f, 2, u64::MAX).unwrap(), 120);
    }

    #[test]
    fn four_a1_mod_3() {
        let l = preset("4A1").unwrap();
        let f = ShiftedForm::plain(&l, 1, 1).unwrap();
        assert_eq!(count_na(&f, 3).unwrap(), 24);
        assert_eq!(count_na_naive(&f, 3, u64::MAX).unwrap(), 24);
    }

    #[test]
    fn sum_of_squares_examples() {
        assert_eq!(count_sum_squares(4, 1, 3, 1).unwrap(), 24);
        assert_eq!(count_sum_squares(4, 4, 3, 1).unwrap(), 24);
        assert_eq!(count_sum_squares(2, 0, 3, 1).unwrap(), 1);
    }

    #[test]
    fn d_count_at_modulus_one() {
        assert_eq!(count_d_na1(4, &[0, 1, 1, 1], 1, 1).unwrap(), 1);
        assert_eq!(count_d_na1(4, &[0, 1, 1, 1], 2, 1).unwrap(), 0);
        assert_eq!(count_d_na1(4, &[0, 0, 0, 0], 4, 1).unwrap(), 1);
    }

    #[test]
    fn d_count_matches_sum_of_squares_at_three() {
        assert_eq!(
            count_d_na1(4, &[0, 0, 0, 0], 4, 3).unwrap(),
            count_sum_squares(4, -4, 3, 1).unwrap()
        );
    }

    #[test]
    fn theta_boundary_guard() {
        // Delta = 0 with lambda all odd: every x contributes mod 4a only when the sum vanishes.
        let d = count_d_na1(4, &[1, 1, 1, 1], 0, 2).unwrap();
        assert_eq!(d, naive_d(4, &[1, 1, 1, 1], 0, 2));
    }

    #[test]
    fn d_count_matches_naive() {
        for lam in [[0i64, 0, 0, 0], [1, 0, 0, 0], [1, 1, 0, 0], [1, 1, 1, 1], [3, -1, 2, 0]] {
            let s: i64 = lam.iter().map(|v| v * v).sum();
            for n in 0..4 {
                let delta = 4 * n - s;
                for a in [1u64, 2, 3, 4, 5, 6, 8] {
                    assert_eq!(count_d_na1(4, &lam, delta, a).unwrap(), naive_d(4, &lam, delta, a), "{lam:?} {delta} {a}");
                }
            }
        }
    }

    #[test]
    fn alpha_equals_omega_for_all_patterns_rank_eight() {
        for mask in 0u32..256 {
            let lam: Vec<i64> = (0..8).map(|i| ((mask >> i) & 1) as i64).collect();
            let s: i64 = lam.iter().map(|v| v * v).sum();
            for n in 0..4 {
                let delta = 4 * n - s;
                let (a, w) = alpha_omega(8, &lam, delta).unwrap();
                assert_eq!(a, w, "{lam:?}");
            }
        }
    }

    #[test]
    fn omega_for_rank_one() {
        assert_eq!(alpha_omega(1, &[0], 0).unwrap().1, 1);
        assert_eq!(alpha_omega(1, &[0], -1).unwrap().1, 1);
        assert_eq!(alpha_omega(1, &[0], 1).unwrap().1, 0);
    }

    #[test]
    fn budget_error_is_explicit() {
        let e8 = preset("E8").unwrap();
        let f = ShiftedForm::plain(&e8, 1, 1).unwrap();
        assert!(matches!(count_na_with_budget(&f, 1 << 20, 1000), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn representation_counts() {
        let l = validate_lattice("D4", d4_gram()).unwrap();
        let c = count_representations_mod(&l, &int(1), 2, u64::MAX).unwrap();
        let poly = QuadPoly::from_gram(&d4_gram(), 1).with_linear(vec![0; 4], -1);
        assert_eq!(c, count_zeros_naive(&poly, 2, u64::MAX).unwrap());
    }

    fn small_lattice() -> impl Strategy<Value = Lattice> {
        prop::sample::select(vec!["4A1", "2A1", "3A1", "D4", "A2"]).prop_map(|name| match name {
            "A2" => validate_lattice("A2", vec![vec![2, -1], vec![-1, 2]]).unwrap(),
            "D4" => validate_lattice("D4", d4_gram()).unwrap(),
            other => {
                let n: usize = other[..1].parse().unwrap();
                validate_lattice(other, na1_gram(n)).unwrap()
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn multiplicative_in_coprime_moduli(l in small_lattice(), n in 0i64..6, a in 1u64..=12, b in 1u64..=12) {
            prop_assume!(a.gcd(&b) == 1);
            prop_assume!(a.pow(l.rank() as u32) * b.pow(l.rank() as u32) <= 200_000);
            let f = ShiftedForm::plain(&l, 1, n).unwrap();
            let whole = count_na_naive(&f, a * b, u64::MAX).unwrap();
            prop_assert_eq!(whole, count_na_naive(&f, a, u64::MAX).unwrap() * count_na_naive(&f, b, u64::MAX).unwrap());
            prop_assert_eq!(whole, count_na(&f, a * b).unwrap());
        }

        #[test]
        fn d_count_equals_sum_of_squares_at_odd_primes(
            rank in prop::sample::select(vec![2usize, 4]),
            mask in 0u32..16,
            n in 0i64..5,
            p in prop::sample::select(vec![3u64, 5]),
            l in 0u32..=2,
        ) {
            let lam: Vec<i64> = (0..rank).map(|i| ((mask >> i) & 1) as i64).collect();
            let s: i64 = lam.iter().map(|v| v * v).sum();
            let delta = 4 * n - s;
            let d = count_d_na1(rank, &lam, delta, p.pow(l)).unwrap();
            let a = count_sum_squares(rank, -delta, p, l).unwrap();
            prop_assert_eq!(d, a);
            let (alpha, omega) = alpha_omega(rank, &lam, delta).unwrap();
            prop_assert_eq!(alpha as u128 * d, omega as u128 * a);
        }

        #[test]
        fn shifted_counts_stabilize(
            mask in 0u32..16,
            n in 1i64..4,
            p in prop::sample::select(vec![2u64, 3, 5]),
        ) {
            let l = validate_lattice("4A1", na1_gram(4)).unwrap();
            let lam = DualVector::new((0..4).map(|i| ((mask >> i) & 1) as i64).collect(), 2);
            let f = ShiftedForm::new(&l, 1, n, lam).unwrap();
            let delta = f.delta();
            prop_assume!(delta > Rational::from_integer(0.into()));
            let two_delta = delta * Rational::from_integer(2.into());
            let ord = crate::arith::ord_p_big(two_delta.numer(), p).unwrap() as i64
                - crate::arith::ord_p_big(two_delta.denom(), p).unwrap() as i64;
            let start = (2 * ord + 1).max(1) as u32;
            let ratio = |e: u32| {
                let c = count_na(&f, p.pow(e)).unwrap();
                Rational::new(c.into(), num_bigint::BigInt::from(p).pow(3 * e))
            };
            let first = ratio(start);
            for e in start + 1..=5.max(start + 1) {
                if p.pow(4 * e) > 100_000_000 { break; }
                prop_assert_eq!(ratio(e), first.clone());
            }
        }
    }
}
