//! Verification battery: closed formulas against exact counting, the theta
//! transformation law, and the Jacobi transformation laws of a truncated
//! expansion.
//!
//! Every check produces a [`CheckRecord`]. Exact checks compare rationals for
//! equality; numeric checks store the achieved relative error next to the
//! tolerance that was applied.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::arith::{format_rational, int, pow_rat, rational_to_f64, Rational};
use crate::density::{density_counting, density_good_prime, density_na1_odd, density_na1_two, density_unimodular};
use crate::eisenstein::{q_expansion, ExpansionOptions};
use crate::error::{Error, Result};
use crate::lattice::{d4_gram, na1_gram, preset, validate_lattice, Lattice};
use crate::qexp::QExpansion;
use crate::rep_count::{
    alpha_omega, count_d_na1, count_representations_mod, count_sum_squares, count_zeros, default_ceiling, QuadPoly,
};

/// Tolerance for `T`-periodicity, which holds term by term.
pub const T_TOLERANCE: f64 = 1e-12;
/// Tolerance for the Heisenberg translations `[x, y]`.
pub const TRANSLATION_TOLERANCE: f64 = 1e-5;
/// Tolerance for the inversion `S`.
pub const S_TOLERANCE: f64 = 1e-4;
/// Tolerance for the theta transformation formula.
pub const THETA_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub grid_point: String,
    pub lhs: String,
    pub rhs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_equal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl CheckRecord {
    pub fn exact(name: &str, grid_point: String, lhs: &Rational, rhs: &Rational) -> Self {
        let equal = lhs == rhs;
        Self {
            name: name.to_string(),
            grid_point,
            lhs: format_rational(lhs),
            rhs: format_rational(rhs),
            exact_equal: Some(equal),
            abs_error: None,
            rel_error: None,
            tolerance: None,
            pass: equal,
        }
    }

    /// Relative comparison `|lhs - rhs| / |rhs| <= tolerance`.
    pub fn numeric(name: &str, grid_point: String, lhs: Complex64, rhs: Complex64, tolerance: f64) -> Self {
        let abs = (lhs - rhs).norm();
        let rel = if rhs.norm() > 0.0 { abs / rhs.norm() } else { abs };
        Self {
            name: name.to_string(),
            grid_point,
            lhs: format_complex(lhs),
            rhs: format_complex(rhs),
            exact_equal: None,
            abs_error: Some(abs),
            rel_error: Some(rel),
            tolerance: Some(tolerance),
            pass: rel <= tolerance,
        }
    }
}

fn format_complex(z: Complex64) -> String {
    format!("{:.17e}{:+.17e}i", z.re, z.im)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.failed() == 0
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    /// Per check name: `(name, passed, total)` in first-seen order.
    pub fn summary(&self) -> Vec<(String, usize, usize)> {
        let mut out: Vec<(String, usize, usize)> = Vec::new();
        for c in &self.checks {
            match out.iter_mut().find(|(n, _, _)| *n == c.name) {
                Some(entry) => {
                    entry.1 += usize::from(c.pass);
                    entry.2 += 1;
                }
                None => out.push((c.name.clone(), usize::from(c.pass), 1)),
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "summary": {
                "total": self.checks.len(),
                "passed": self.passed(),
                "failed": self.failed(),
            },
            "checks": self.checks,
        })
    }
}

/// Neumaier-compensated complex summation.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

impl CompensatedSum {
    fn add(&mut self, x: Complex64) {
        self.sum.re = Self::step(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = Self::step(self.sum.im, x.im, &mut self.comp.im);
    }

    fn step(sum: f64, x: f64, comp: &mut f64) -> f64 {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            *comp += (sum - t) + x;
        } else {
            *comp += (x - t) + sum;
        }
        t
    }

    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * std::f64::consts::PI)
}

fn gram_f64(lattice: &Lattice) -> Vec<Vec<f64>> {
    lattice
        .gram()
        .iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect()
}

/// `S w` for a complex vector `w`.
fn apply_gram_complex(gram: &[Vec<f64>], w: &[Complex64]) -> Vec<Complex64> {
    gram.iter()
        .map(|row| row.iter().zip(w).map(|(g, x)| x * g).sum())
        .collect()
}

fn pair(v: &[f64], sw: &[Complex64]) -> Complex64 {
    v.iter().zip(sw).map(|(a, b)| b * a).sum()
}

/// `(w, w)_S` for complex `w`, bilinear (no conjugation).
fn bilinear(gram: &[Vec<f64>], w: &[Complex64]) -> Complex64 {
    let sw = apply_gram_complex(gram, w);
    w.iter().zip(&sw).map(|(a, b)| a * b).sum()
}

/// `Theta_{S,a,b}(tau, z) = sum_{v in a + Z^N} e(q(v) tau + (v, z + b))`, truncated at `q(v) <= bound`.
fn theta_sum(lattice: &Lattice, a: &[f64], b: &[f64], tau: Complex64, z: &[Complex64], bound: f64) -> Complex64 {
    let gram = gram_f64(lattice);
    let shifted: Vec<Complex64> = z.iter().zip(b).map(|(zi, bi)| zi + bi).collect();
    let sw = apply_gram_complex(&gram, &shifted);
    let mut acc = CompensatedSum::default();
    lattice.for_each_shifted_vector(a, bound, |v| {
        let q: f64 = v
            .iter()
            .zip(&gram)
            .map(|(vi, row)| vi * row.iter().zip(v).map(|(g, vj)| g * vj).sum::<f64>())
            .sum::<f64>()
            / 2.0;
        acc.add((two_pi_i() * (tau * q + pair(v, &sw))).exp());
    });
    acc.value()
}

/// A bound for `sum_{v in a + Z^N, q(v) > bound} |e(q(v) tau + (v, w))|`.
///
/// The number of points with `q(v) <= t` is at most the volume of the ball of
/// radius `sqrt(2t) + d` divided by `sqrt(det S)`, where `d` is the sum of the
/// basis vector lengths. Each term is at most
/// `exp(-2 pi q Im tau + 2 pi sqrt(2 q (Im w, Im w)))`.
fn theta_tail_bound(lattice: &Lattice, tau: Complex64, w: &[Complex64], bound: f64) -> f64 {
    let n = lattice.rank() as f64;
    let gram = gram_f64(lattice);
    let diam: f64 = (0..lattice.rank()).map(|i| gram[i][i].sqrt()).sum();
    let det = rational_to_f64(&Rational::from_integer(lattice.det().clone()));
    let unit_ball = std::f64::consts::PI.powf(n / 2.0) / gamma_half_integer(lattice.rank() + 2);
    let count = |t: f64| unit_ball * ((2.0 * t).sqrt() + diam).powf(n) / det.sqrt();
    let im_w: Vec<Complex64> = w.iter().map(|x| Complex64::new(x.im, 0.0)).collect();
    let ww = bilinear(&gram, &im_w).re.max(0.0);
    let y = tau.im;
    let mut total = 0.0;
    let mut t = bound.floor();
    loop {
        let term = count(t + 1.0) * (-2.0 * std::f64::consts::PI * (t * y - (2.0 * (t + 1.0) * ww).sqrt())).exp();
        total += term;
        if t > bound + 10.0 && term < 1e-30 * total.max(1e-300) {
            break;
        }
        if t > bound + 1e6 {
            return f64::INFINITY;
        }
        t += 1.0;
    }
    total
}

/// `Gamma(n / 2)`.
fn gamma_half_integer(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        (1..n / 2).map(|i| i as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x < n as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Representatives of `S^{-1} Z^N / Z^N` with entries in `[0, 1)`.
pub fn discriminant_representatives(lattice: &Lattice) -> Vec<Vec<Rational>> {
    let n = lattice.rank();
    let cols: Vec<Vec<Rational>> = (0..n)
        .map(|j| (0..n).map(|i| lattice.dual_gram()[i][j].clone()).collect())
        .collect();
    let reduce = |v: Vec<Rational>| -> Vec<Rational> { v.into_iter().map(|x| &x - x.floor()).collect() };
    let mut seen: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let mut queue = vec![vec![Rational::zero(); n]];
    seen.insert(queue[0].clone());
    while let Some(v) = queue.pop() {
        for c in &cols {
            let w = reduce(v.iter().zip(c).map(|(a, b)| a + b).collect());
            if seen.insert(w.clone()) {
                queue.push(w);
            }
        }
    }
    seen.into_iter().collect()
}

/// Both sides of
/// `Theta_{S,a,0}(-1/tau, z/tau) = (tau/i)^{N/2} det(S)^{-1/2} e(q_S(z)/tau) sum_p Theta_{S,p,-a}(tau, z)`,
/// each truncated at `q(v) <= q_trunc`.
pub fn check_theta_transformation(
    lattice: &Lattice,
    a: &[Rational],
    tau: Complex64,
    z: &[Complex64],
    q_trunc: f64,
) -> Result<CheckRecord> {
    let n = lattice.rank();
    if a.len() != n || z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if a.len() != n { a.len() } else { z.len() },
        });
    }
    if tau.im < 0.5 {
        return Err(Error::InvalidInput(format!("Im(tau) = {} is below 1/2", tau.im)));
    }
    let af: Vec<f64> = a.iter().map(rational_to_f64).collect();
    let zero = vec![0.0; n];
    let tau_inv = -tau.inv();
    let z_inv: Vec<Complex64> = z.iter().map(|x| x / tau).collect();
    let lhs = theta_sum(lattice, &af, &zero, tau_inv, &z_inv, q_trunc);

    let reps = discriminant_representatives(lattice);
    let minus_a: Vec<f64> = af.iter().map(|x| -x).collect();
    let mut acc = CompensatedSum::default();
    for p in &reps {
        let pf: Vec<f64> = p.iter().map(rational_to_f64).collect();
        acc.add(theta_sum(lattice, &pf, &minus_a, tau, z, q_trunc));
    }
    let gram = gram_f64(lattice);
    let det = rational_to_f64(&Rational::from_integer(lattice.det().clone()));
    let factor = (tau / Complex64::i()).powf(n as f64 / 2.0) / det.sqrt()
        * (Complex64::new(0.0, std::f64::consts::PI) * bilinear(&gram, z) / tau).exp();
    let rhs = factor * acc.value();

    let tail_lhs = theta_tail_bound(lattice, tau_inv, &z_inv, q_trunc);
    let tail_rhs = factor.norm() * reps.len() as f64 * theta_tail_bound(lattice, tau, z, q_trunc);
    let tail = (tail_lhs + tail_rhs) / rhs.norm().max(f64::MIN_POSITIVE);
    if tail > THETA_TOLERANCE / 10.0 {
        return Err(Error::TruncationInsufficient {
            tail,
            tolerance: THETA_TOLERANCE,
        });
    }
    let point = format!(
        "{} a=[{}] tau={} q_trunc={q_trunc}",
        lattice.name(),
        a.iter().map(format_rational).collect::<Vec<_>>().join(","),
        format_complex(tau)
    );
    Ok(CheckRecord::numeric("theta_transformation", point, lhs, rhs, THETA_TOLERANCE))
}

/// Generators of the Jacobi group used by [`check_slash_invariance`].
#[derive(Debug, Clone, PartialEq)]
pub enum JacobiElement {
    /// `tau -> tau + 1`.
    T,
    /// `tau -> -1/tau`.
    S,
    /// The Heisenberg element `[x, y]` with `x, y` in `L`.
    Translation { x: Vec<i64>, y: Vec<i64> },
}

impl JacobiElement {
    pub fn tolerance(&self) -> f64 {
        match self {
            JacobiElement::T => T_TOLERANCE,
            JacobiElement::S => S_TOLERANCE,
            JacobiElement::Translation { .. } => TRANSLATION_TOLERANCE,
        }
    }

    fn label(&self) -> String {
        match self {
            JacobiElement::T => "T".into(),
            JacobiElement::S => "S".into(),
            JacobiElement::Translation { x, y } => format!("[{x:?},{y:?}]"),
        }
    }
}

/// A truncated expansion prepared for repeated evaluation.
pub struct ExpansionEvaluator {
    gram: Vec<Vec<f64>>,
    terms: Vec<(f64, Vec<f64>, f64)>,
    n_max: u64,
}

impl ExpansionEvaluator {
    pub fn new(lattice: &Lattice, expansion: &QExpansion) -> Self {
        let terms = expansion
            .entries
            .iter()
            .filter_map(|((n, lam), e)| {
                let c = e.coeff.to_f64();
                (c != 0.0).then(|| (*n as f64, lam.coords().iter().map(rational_to_f64).collect(), c))
            })
            .collect();
        Self {
            gram: gram_f64(lattice),
            terms,
            n_max: expansion.n_max,
        }
    }

    /// `sum c(n, lambda) e(n tau + (lambda, z))`.
    pub fn eval(&self, tau: Complex64, z: &[Complex64]) -> Complex64 {
        let sz = apply_gram_complex(&self.gram, z);
        let mut acc = CompensatedSum::default();
        for (n, lam, c) in &self.terms {
            acc.add(*c * (two_pi_i() * (tau * n + pair(lam, &sz))).exp());
        }
        acc.value()
    }
}

/// Compares `(E |_{k,m} g)(tau, z)` with `E(tau, z)` for a truncated expansion.
pub fn check_slash_invariance(
    lattice: &Lattice,
    k: i64,
    m: u64,
    element: &JacobiElement,
    tau: Complex64,
    z: &[Complex64],
    expansion: &QExpansion,
) -> Result<CheckRecord> {
    check_slash_invariance_with(lattice, k, m, element, tau, z, &ExpansionEvaluator::new(lattice, expansion))
}

/// [`check_slash_invariance`] with a prepared evaluator.
pub fn check_slash_invariance_with(
    lattice: &Lattice,
    k: i64,
    m: u64,
    element: &JacobiElement,
    tau: Complex64,
    z: &[Complex64],
    evaluator: &ExpansionEvaluator,
) -> Result<CheckRecord> {
    let n = lattice.rank();
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: z.len(),
        });
    }
    if evaluator.n_max < 8 {
        return Err(Error::TruncationInsufficient {
            tail: f64::INFINITY,
            tolerance: element.tolerance(),
        });
    }
    if tau.im < 1.0 {
        return Err(Error::InvalidInput(format!("Im(tau) = {} is below 1", tau.im)));
    }
    let mf = m as f64;
    let pi_i = Complex64::new(0.0, std::f64::consts::PI);
    let lhs = match element {
        JacobiElement::T => evaluator.eval(tau + 1.0, z),
        JacobiElement::S => {
            let zt: Vec<Complex64> = z.iter().map(|x| x / tau).collect();
            tau.powi(-(k as i32))
                * (-pi_i * mf * bilinear(&evaluator.gram, z) / tau).exp()
                * evaluator.eval(-tau.inv(), &zt)
        }
        JacobiElement::Translation { x, y } => {
            if x.len() != n || y.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: x.len().min(y.len()),
                });
            }
            let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
            let shifted: Vec<Complex64> = (0..n).map(|i| z[i] + xc[i] * tau + y[i] as f64).collect();
            let xz: Complex64 = pair(&x.iter().map(|&v| v as f64).collect::<Vec<_>>(), &apply_gram_complex(&evaluator.gram, z));
            (pi_i * mf * (bilinear(&evaluator.gram, &xc) * tau + 2.0 * xz)).exp() * evaluator.eval(tau, &shifted)
        }
    };
    let rhs = evaluator.eval(tau, z);
    let point = format!(
        "{} k={k} m={m} g={} tau={} z0={}",
        lattice.name(),
        element.label(),
        format_complex(tau),
        format_complex(z.first().copied().unwrap_or_default())
    );
    Ok(CheckRecord::numeric("slash_invariance", point, lhs, rhs, element.tolerance()))
}

/// The oracle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// Ranks of the small lattices (`N A_1`, `A_2`, `A_3`, `D_4` where the rank fits).
    pub ranks: Vec<usize>,
    pub primes: Vec<u64>,
    pub l_max: u32,
    /// Targets range over `1 <= |Delta| <= delta_max`.
    pub delta_max: i64,
    /// Primes for the `E_8` spot checks of the unimodular lemma at level 1.
    pub e8_primes: Vec<u64>,
    /// `alpha = omega` is checked for all ranks up to this.
    pub corollary_max_rank: usize,
    /// Stabilisation is checked up to modulus `p^{2 ord + 2}` at most this large.
    pub modulus_cap: u64,
    /// Perturb one closed-form value so that the report must fail.
    pub inject_fault: bool,
}

impl GridConfig {
    pub fn default_grid() -> Self {
        Self {
            ranks: vec![1, 2, 3, 4],
            primes: vec![2, 3, 5],
            l_max: 2,
            delta_max: 24,
            e8_primes: vec![2, 3],
            corollary_max_rank: 12,
            modulus_cap: 1 << 12,
            inject_fault: false,
        }
    }

    pub fn extended() -> Self {
        Self {
            ranks: vec![1, 2, 3, 4, 5, 6],
            primes: vec![2, 3, 5, 7],
            l_max: 3,
            delta_max: 36,
            e8_primes: vec![2, 3, 5],
            corollary_max_rank: 14,
            modulus_cap: 1 << 14,
            inject_fault: false,
        }
    }
}

fn small_lattices(ranks: &[usize]) -> Result<Vec<Lattice>> {
    let mut out = Vec::new();
    for &r in ranks {
        out.push(validate_lattice(&format!("{r}A1"), na1_gram(r))?);
        match r {
            2 => out.push(validate_lattice("A2", vec![vec![2, -1], vec![-1, 2]])?),
            3 => out.push(validate_lattice("A3", vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]])?),
            4 => out.push(validate_lattice("D4", d4_gram())?),
            _ => {}
        }
    }
    Ok(out)
}

fn targets(delta_max: i64) -> impl Iterator<Item = i64> {
    (-delta_max..=delta_max).filter(|t| *t != 0)
}

fn positive_targets(delta_max: i64) -> impl Iterator<Item = i64> {
    1..=delta_max
}

fn patterns(n: usize) -> impl Iterator<Item = Vec<i64>> {
    (0u64..1 << n).map(move |mask| (0..n).map(|i| ((mask >> i) & 1) as i64).collect())
}

fn scaled_count(count: u128, p: u64, l: u32, n: usize) -> Rational {
    Rational::from_integer(BigInt::from(count)) * pow_rat(p as i64, l as i64 * (1 - n as i64))
}

fn ord(t: i64, p: u64) -> u32 {
    crate::arith::ord_p(t, p).expect("nonzero target")
}

/// Every closed-form density and count on the grid against exact counting.
pub fn run_formula_vs_oracle_suite(grid: &GridConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let ceiling = default_ceiling();
    let lattices = small_lattices(&grid.ranks)?;
    let even_ranks: Vec<usize> = grid.ranks.iter().copied().filter(|r| r % 2 == 0).collect();

    // good primes, both parities of the rank; rank 1 has no closed form
    for l in lattices.iter().filter(|l| l.rank() > 1) {
        for &p in grid.primes.iter().filter(|&&p| p != 2) {
            if (l.det() % BigInt::from(p)).is_zero() {
                continue;
            }
            for t in positive_targets(grid.delta_max) {
                if p.checked_pow(2 * ord(2 * t, p) + 2).is_none_or(|m| m > grid.modulus_cap) {
                    continue;
                }
                let mut closed = density_good_prime(l, p, t)?;
                if grid.inject_fault && report.checks.is_empty() {
                    closed += Rational::new(1.into(), 1000.into());
                }
                let counted = density_counting(l, p, t)?.rational().cloned().expect("finite place");
                report
                    .checks
                    .push(CheckRecord::exact("good_prime_density", format!("{} p={p} t={t}", l.name(), ), &closed, &counted));
            }
        }
    }

    // unimodular lemma against sums of hyperbolic planes
    for &n in &even_ranks {
        for &p in &grid.primes {
            for lv in 1..=grid.l_max {
                let modulus = p.pow(lv);
                for delta in targets(grid.delta_max) {
                    let poly = QuadPoly::hyperbolic(n).with_linear(vec![0; n], -(delta as i128));
                    let counted = scaled_count(count_zeros(&poly, modulus, ceiling)?, p, lv, n);
                    report.checks.push(CheckRecord::exact(
                        "unimodular_lemma",
                        format!("H^{} p={p} l={lv} delta={delta}", n / 2),
                        &density_unimodular(n, p, lv, delta)?,
                        &counted,
                    ));
                }
            }
        }
    }
    let e8 = preset("E8")?;
    for &p in &grid.e8_primes {
        for delta in targets(grid.delta_max) {
            let counted = scaled_count(count_representations_mod(&e8, &int(delta), p, ceiling)?, p, 1, 8);
            report.checks.push(CheckRecord::exact(
                "unimodular_lemma_e8",
                format!("E8 p={p} l=1 delta={delta}"),
                &density_unimodular(8, p, 1, delta)?,
                &counted,
            ));
        }
    }

    // N A_1 at odd primes and at 2, with D = A_N at odd primes
    for &n in &even_ranks {
        for lam in patterns(n) {
            let sq: i64 = lam.iter().sum();
            for delta in targets(grid.delta_max).filter(|d| (d + sq).rem_euclid(4) == 0) {
                for &p in &grid.primes {
                    for lv in 1..=grid.l_max {
                        let modulus = p.pow(lv);
                        let d_count = count_d_na1(n, &lam, delta, modulus)?;
                        let counted = scaled_count(d_count, p, lv, n);
                        let point = format!("{n}A1 lam={lam:?} p={p} l={lv} delta={delta}");
                        if p == 2 {
                            report.checks.push(CheckRecord::exact(
                                "na1_two_density",
                                point,
                                &density_na1_two(n, &lam, lv, delta)?,
                                &counted,
                            ));
                        } else {
                            report.checks.push(CheckRecord::exact(
                                "na1_odd_density",
                                point.clone(),
                                &density_na1_odd(n, p, lv, delta)?,
                                &counted,
                            ));
                            let a = count_sum_squares(n, -delta, p, lv)?;
                            report.checks.push(CheckRecord::exact(
                                "d_equals_sum_of_squares",
                                point,
                                &Rational::from_integer(BigInt::from(d_count)),
                                &Rational::from_integer(BigInt::from(a)),
                            ));
                        }
                    }
                }
            }
        }
    }

    // stabilisation of p^{l(1-N)} N_{p^l} past l = 2 ord_p(2t)
    for l in &lattices {
        for &p in &grid.primes {
            for t in positive_targets(grid.delta_max) {
                let start = 2 * ord(2 * t, p) + 1;
                if p.checked_pow(start + 1).is_none_or(|m| m > grid.modulus_cap) {
                    continue;
                }
                let level = |e: u32| -> Result<Rational> {
                    let c = count_representations_mod(l, &int(t), p.pow(e), ceiling)?;
                    Ok(scaled_count(c, p, e, l.rank()))
                };
                report.checks.push(CheckRecord::exact(
                    "stabilization",
                    format!("{} p={p} t={t} levels {start},{}", l.name(), start + 1),
                    &level(start)?,
                    &level(start + 1)?,
                ));
            }
        }
    }

    // alpha = omega on every parity pattern
    for n in 1..=grid.corollary_max_rank {
        let mut mismatches = 0usize;
        let mut total = 0usize;
        for lam in patterns(n) {
            let odd: i64 = lam.iter().sum();
            let (alpha, omega) = alpha_omega(n, &lam, -odd)?;
            total += 1;
            if alpha != omega {
                mismatches += 1;
            }
        }
        report.checks.push(CheckRecord::exact(
            "alpha_equals_omega",
            format!("N={n}, {total} patterns"),
            &int(mismatches as i64),
            &int(0),
        ));
    }
    Ok(report)
}

/// Options for the transformation-law checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularityConfig {
    pub n_max: u64,
    pub q_trunc: f64,
}

impl Default for ModularityConfig {
    fn default() -> Self {
        Self { n_max: 8, q_trunc: 8.0 }
    }
}

/// Slash invariance of `E_{12,1}` for `E_8` and the theta transformation on `E_8` and `2 A_1`.
pub fn run_modularity_suite(config: &ModularityConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let e8 = preset("E8")?;
    let expansion = q_expansion(&e8, 12, 1, config.n_max, ExpansionOptions::default())?;
    let ev = ExpansionEvaluator::new(&e8, &expansion);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let tenth = vec![c(0.1, 0.0); 8];
    let mut e1 = vec![0i64; 8];
    e1[0] = 1;
    let mut small = vec![c(0.0, 0.0); 8];
    small[0] = c(0.05, 0.0);
    small[3] = c(-0.03, 0.01);
    let cases: Vec<(JacobiElement, Complex64, Vec<Complex64>)> = vec![
        (JacobiElement::T, c(0.0, 2.0), tenth.clone()),
        (JacobiElement::T, c(0.3, 1.0), small.clone()),
        (
            JacobiElement::Translation {
                x: e1.clone(),
                y: vec![0; 8],
            },
            c(0.0, 2.0),
            tenth.clone(),
        ),
        (
            JacobiElement::Translation {
                x: vec![0; 8],
                y: e1.clone(),
            },
            c(0.0, 2.0),
            tenth.clone(),
        ),
        (JacobiElement::S, c(0.0, 1.0), vec![c(0.0, 0.0); 8]),
        (JacobiElement::S, c(0.0, 1.0), small.clone()),
        (JacobiElement::S, c(0.2, 1.05), small.clone()),
    ];
    for (g, tau, z) in cases {
        report.checks.push(check_slash_invariance_with(&e8, 12, 1, &g, tau, &z, &ev)?);
    }

    let zero8 = vec![Rational::zero(); 8];
    let third: Vec<Rational> = (0..8).map(|i| Rational::new(BigInt::from(i % 3), BigInt::from(3))).collect();
    report
        .checks
        .push(check_theta_transformation(&e8, &zero8, c(0.0, 1.0), &[c(0.0, 0.0); 8], config.q_trunc)?);
    report
        .checks
        .push(check_theta_transformation(&e8, &third, c(0.1, 1.0), &small, config.q_trunc)?);
    let a2 = preset("2A1")?;
    let q2 = config.q_trunc.max(12.0);
    for (a, z) in [
        (vec![Rational::zero(), Rational::zero()], vec![c(0.0, 0.0); 2]),
        (
            vec![Rational::new(1.into(), 3.into()), Rational::zero()],
            vec![c(0.1, 0.0), c(-0.2, 0.05)],
        ),
    ] {
        report
            .checks
            .push(check_theta_transformation(&a2, &a, c(0.0, 2.0), &z, q2)?);
    }
    Ok(report)
}
