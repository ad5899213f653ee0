//! Fourier coefficients of the Jacobi-Eisenstein series `E_{k,m}`.
//!
//! For index 1 the coefficient of `q^n zeta^lambda` with `Delta = n - q(lambda)
//! > 0` is
//!
//! ```text
//! beta(n, lambda) = P(Delta) / zeta(k - N) * sum_a N_a(Q) / a^{k-1},
//! P(Delta) = i^{k-N} (-2 pi)^{k-N/2} Delta^{k-N/2-1} / (sqrt(det S) (k-N/2-1)!)
//! ```
//!
//! with `Q(x) = q(x) - (lambda, x) + n`. Index `m` on `L` is index 1 on the
//! rescaled lattice `L(m)`, which is how [`coefficients::coefficient_general_m`]
//! evaluates it.

pub mod coefficients;
pub mod expansion;
pub mod series;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::arith::{factorial, int, is_perfect_square, pow_rat, rational_pow, rational_to_f64, PiRational, Rational};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub use coefficients::{
    beta_na1, coefficient_general_m, coefficient_na1, coefficient_na1_printed_closed_form, coefficient_na1_truncated,
    coefficient_unimodular, coefficient_unimodular_via_series, GeneralCoefficient, GeneralEvaluator,
};
pub use expansion::{q_expansion, theta_coefficients, ExpansionOptions, Pipeline};
pub use series::{dirichlet_series, truncated_series, SeriesMode, SeriesValue};

pub(crate) use series::check_weight;

/// `gamma = (-1)^{3k/2 - N - 1} pi^{k-N/2} Delta^{k-N/2-1} / (2^{k-2} (k-N/2-1)!)`
/// for `Delta > 0` and zero otherwise; the normalisation used for `N A_1` with
/// `Delta = 4n - sum lambda_i^2`.
pub fn gamma_factor(k: i64, rank: usize, delta: i64) -> Result<PiRational> {
    check_weight(k, rank)?;
    if rank % 2 == 1 {
        return Err(Error::OddRankUnsupported { rank });
    }
    if delta <= 0 {
        return Ok(PiRational::zero());
    }
    let big_k = k - rank as i64 / 2;
    let sign = if (3 * k / 2 - rank as i64 - 1).is_even() { 1 } else { -1 };
    let coeff = int(sign) * pow_rat(delta, big_k - 1)
        / (pow_rat(2, k - 2) * Rational::from_integer(factorial((big_k - 1) as u64)));
    Ok(PiRational::new(coeff, big_k as i32))
}

fn volume_root(lattice: &Lattice, m: u64) -> Result<Rational> {
    let n = lattice.rank() as i64;
    let root = is_perfect_square(lattice.det()).ok_or_else(|| Error::IrrationalVolume {
        det: lattice.det().to_string(),
    })?;
    Ok(Rational::from_integer(root) * pow_rat(m as i64, n / 2))
}

fn check_index_inputs(lattice: &Lattice, k: i64, m: u64, delta: &Rational) -> Result<()> {
    check_weight(k, lattice.rank())?;
    if lattice.rank() % 2 == 1 {
        return Err(Error::OddRankUnsupported { rank: lattice.rank() });
    }
    if m == 0 {
        return Err(Error::InvalidInput("index m must be at least 1".into()));
    }
    if !delta.is_positive() {
        return Err(Error::DeltaNotPositive { delta: delta.to_string() });
    }
    Ok(())
}

/// `P(Delta)` on `L(m)` exactly, where `Delta = m n - q(lambda)` is the norm on `L`.
///
/// Requires a square determinant so that the volume `sqrt(det(mS))` is rational.
pub fn theorem_prefactor(lattice: &Lattice, k: i64, m: u64, delta: &Rational) -> Result<PiRational> {
    check_index_inputs(lattice, k, m, delta)?;
    let n = lattice.rank() as i64;
    let big_k = k - n / 2;
    let sign = if ((k - n) / 2 + big_k).is_even() { 1 } else { -1 };
    let scaled = delta / int(m as i64);
    let coeff = int(sign) * pow_rat(2, big_k) * rational_pow(&scaled, big_k - 1)
        / (volume_root(lattice, m)? * Rational::from_integer(factorial((big_k - 1) as u64)));
    Ok(PiRational::new(coeff, big_k as i32))
}

/// `P(Delta)` in complex floating point, for any determinant.
pub fn theorem_prefactor_complex(lattice: &Lattice, k: i64, m: u64, delta: &Rational) -> Result<Complex64> {
    check_index_inputs(lattice, k, m, delta)?;
    let n = lattice.rank() as i64;
    let big_k = k - n / 2;
    let i_power = Complex64::i().powi((k - n) as i32);
    let det = rational_to_f64(&Rational::from_integer(lattice.det().clone()));
    let vol = (det * (m as f64).powi(n as i32)).sqrt();
    let scaled = rational_to_f64(delta) / m as f64;
    let fact = rational_to_f64(&Rational::from_integer(factorial((big_k - 1) as u64)));
    let magnitude = (-2.0 * std::f64::consts::PI).powi(big_k as i32) * scaled.powi(big_k as i32 - 1) / (vol * fact);
    Ok(i_power * magnitude)
}

pub(crate) fn require_pi_free(v: PiRational) -> Result<Rational> {
    if v.is_zero() {
        return Ok(Rational::zero());
    }
    v.as_rational()
        .cloned()
        .ok_or_else(|| Error::InconsistentInput(format!("powers of pi did not cancel: {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::lattice::preset;

    #[test]
    fn gamma_factor_values() {
        assert!(gamma_factor(12, 8, 0).unwrap().is_zero());
        assert!(gamma_factor(12, 8, -3).unwrap().is_zero());
        assert_eq!(gamma_factor(12, 8, 1).unwrap(), PiRational::new(rat(-1, 1024 * 5040), 8));
        assert!(matches!(gamma_factor(10, 8, 1), Err(Error::WeightTooSmall { .. })));
        assert!(matches!(gamma_factor(13, 8, 1), Err(Error::WeightTooSmall { .. })));
    }

    #[test]
    fn prefactor_exact_and_complex_agree() {
        for (name, k, m) in [("E8", 12, 1u64), ("E8", 14, 2), ("4A1", 10, 1), ("6A1", 12, 3)] {
            let l = preset(name).unwrap();
            for d in [rat(1, 1), rat(3, 4), rat(7, 2)] {
                let exact = theorem_prefactor(&l, k, m, &d).unwrap().to_f64();
                let c = theorem_prefactor_complex(&l, k, m, &d).unwrap();
                assert!(c.im.abs() < 1e-12 * c.re.abs());
                assert!((c.re - exact).abs() < 1e-12 * exact.abs(), "{name} {k} {m}");
            }
        }
    }

    #[test]
    fn printed_gamma_is_the_negative_prefactor_for_na1() {
        // lambda in Z^N for the printed normalisation corresponds to lambda / 2 in the dual
        for (rank, k) in [(4usize, 10i64), (6, 12), (8, 14)] {
            let l = preset(&format!("{rank}A1")).unwrap();
            for delta4 in 1..=9 {
                let g = gamma_factor(k, rank, delta4).unwrap();
                let p = theorem_prefactor(&l, k, 1, &rat(delta4, 4)).unwrap();
                assert_eq!(g, -p);
            }
        }
    }

    #[test]
    fn prefactor_guards() {
        let a2 = crate::lattice::validate_lattice("A2A2", {
            let mut g = vec![vec![0i64; 4]; 4];
            g[0] = vec![2, -1, 0, 0];
            g[1] = vec![-1, 2, 0, 0];
            g[2] = vec![0, 0, 2, -1];
            g[3] = vec![0, 0, -1, 2];
            g
        })
        .unwrap();
        assert!(theorem_prefactor(&a2, 8, 1, &rat(1, 1)).is_ok());
        let d3 = preset("D4").unwrap();
        assert!(matches!(theorem_prefactor(&d3, 8, 1, &rat(0, 1)), Err(Error::DeltaNotPositive { .. })));
        let odd = preset("3A1").unwrap();
        assert!(matches!(theorem_prefactor(&odd, 8, 1, &rat(1, 1)), Err(Error::OddRankUnsupported { .. })));
    }
}
