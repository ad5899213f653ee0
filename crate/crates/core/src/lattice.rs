//! Even positive-definite lattices given by an integer Gram matrix.
//!
//! A [`Lattice`] caches its determinant, inverse Gram matrix and level. Points
//! of the dual lattice are stored as [`DualVector`]s with a common
//! denominator. Enumeration of short vectors uses an exact rational `LDL^T`
//! decomposition to drive a Fincke-Pohst style depth-first search; the float
//! bounds it uses are widened and every candidate is filtered by an exact
//! integer evaluation of the quadratic form.

#![allow(clippy::needless_range_loop)]

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Deserialize;

use crate::arith::{format_rational, rational_to_f64, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    name: String,
    gram: Vec<Vec<i64>>,
    det: BigInt,
    dual_gram: Vec<Vec<Rational>>,
    level: u64,
    /// `q(x) = 1/2 sum_i d_i (x_i + sum_{j>i} mu_ij x_j)^2`
    ldl_diag: Vec<Rational>,
    ldl_mu: Vec<Vec<Rational>>,
}

#[derive(Deserialize)]
struct LatticeFile {
    name: String,
    gram: Vec<Vec<i64>>,
}

/// Exact `LDL^T` of a symmetric rational matrix: returns `(d, mu)` with
/// `A = sum_i d_i v_i v_i^T`, `v_i = e_i + sum_{j>i} mu_ij e_j`. Stops at the
/// first non-positive pivot and reports its (1-based) order.
fn ldl(a: &[Vec<Rational>]) -> std::result::Result<(Vec<Rational>, Vec<Vec<Rational>>), usize> {
    let n = a.len();
    let mut work: Vec<Vec<Rational>> = a.to_vec();
    let mut d = Vec::with_capacity(n);
    let mut mu = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        let piv = work[i][i].clone();
        if !piv.is_positive() {
            return Err(i + 1);
        }
        for j in i + 1..n {
            mu[i][j] = &work[i][j] / &piv;
        }
        for r in i + 1..n {
            for c in i + 1..n {
                let delta = &mu[i][r] * &work[i][c];
                work[r][c] -= delta;
            }
        }
        d.push(piv);
    }
    Ok((d, mu))
}

fn invert(a: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv_row = (col..n).find(|&r| !m[r][col].is_zero()).expect("matrix is invertible");
        m.swap(col, piv_row);
        let piv = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= &piv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..2 * n {
                    let delta = &f * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    m.into_iter().map(|row| row[n..].to_vec()).collect()
}

fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

/// Validate a Gram matrix and build the lattice with all cached invariants.
pub fn validate_lattice(name: &str, gram: Vec<Vec<i64>>) -> Result<Lattice> {
    let n = gram.len();
    for row in &gram {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if gram[i][j] != gram[j][i] {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| gram[i][i].rem_euclid(2) != 0) {
        return Err(Error::NotEven { index: i });
    }
    let rat: Vec<Vec<Rational>> = gram
        .iter()
        .map(|r| r.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect())
        .collect();
    let (d, mu) = ldl(&rat).map_err(|order| Error::NotPositiveDefinite { order })?;
    let det_r = d.iter().fold(Rational::one(), |acc, x| acc * x);
    debug_assert!(det_r.is_integer());
    let det = det_r.to_integer();
    let dual = invert(&rat);
    let mut level = BigInt::one();
    for i in 0..n {
        for j in 0..n {
            let entry = if i == j {
                &dual[i][j] / Rational::from_integer(BigInt::from(2))
            } else {
                dual[i][j].clone()
            };
            level = lcm_big(&level, entry.denom());
        }
    }
    let level = level
        .to_u64()
        .ok_or_else(|| Error::UnsupportedLattice("level does not fit in 64 bits".into()))?;
    Ok(Lattice {
        name: name.to_string(),
        gram,
        det,
        dual_gram: dual,
        level,
        ldl_diag: d,
        ldl_mu: mu,
    })
}

/// Standard Gram matrix of E8 (Bourbaki labelling of the Dynkin diagram).
pub fn e8_gram() -> Vec<Vec<i64>> {
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (2, 7)];
    let mut g = vec![vec![0i64; 8]; 8];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 2;
    }
    for &(a, b) in &edges {
        g[a][b] = -1;
        g[b][a] = -1;
    }
    g
}

pub fn d4_gram() -> Vec<Vec<i64>> {
    vec![
        vec![2, -1, 0, 0],
        vec![-1, 2, -1, -1],
        vec![0, -1, 2, 0],
        vec![0, -1, 0, 2],
    ]
}

pub fn na1_gram(n: usize) -> Vec<Vec<i64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 2 } else { 0 }).collect())
        .collect()
}

/// Preset names: `E8`, `D4`, and `<N>A1` such as `4A1`.
pub fn preset(name: &str) -> Result<Lattice> {
    let upper = name.trim().to_ascii_uppercase();
    match upper.as_str() {
        "E8" => validate_lattice("E8", e8_gram()),
        "D4" => validate_lattice("D4", d4_gram()),
        _ => {
            if let Some(prefix) = upper.strip_suffix("A1") {
                let n: usize = if prefix.is_empty() {
                    1
                } else {
                    prefix
                        .parse()
                        .map_err(|_| Error::InvalidInput(format!("unknown preset lattice '{name}'")))?
                };
                if n == 0 {
                    return Err(Error::InvalidInput("rank must be positive".into()));
                }
                validate_lattice(&format!("{n}A1"), na1_gram(n))
            } else {
                Err(Error::InvalidInput(format!("unknown preset lattice '{name}'")))
            }
        }
    }
}

/// Load `{"name": ..., "gram": [[...]]}` and validate it.
pub fn load_lattice_file(path: &Path) -> Result<Lattice> {
    let text = std::fs::read_to_string(path)?;
    let file: LatticeFile = serde_json::from_str(&text)?;
    validate_lattice(&file.name, file.gram)
}

impl Lattice {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn dual_gram(&self) -> &[Vec<Rational>] {
        &self.dual_gram
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// Order of the discriminant group `L^v / L`.
    pub fn discriminant_order(&self) -> &BigInt {
        &self.det
    }

    pub fn is_unimodular(&self) -> bool {
        self.det.is_one()
    }

    /// True when the Gram matrix is `2 I_N`.
    pub fn is_na1(&self) -> bool {
        self.gram
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().enumerate().all(|(j, &v)| v == if i == j { 2 } else { 0 }))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: len,
            });
        }
        Ok(())
    }

    /// `(x, y)_S` for integer vectors.
    pub fn inner(&self, x: &[i64], y: &[i64]) -> Result<i128> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let mut acc = 0i128;
        for (i, row) in self.gram.iter().enumerate() {
            for (j, &s) in row.iter().enumerate() {
                acc += x[i] as i128 * s as i128 * y[j] as i128;
            }
        }
        Ok(acc)
    }

    /// `q(x) = (x, x)_S / 2`.
    pub fn quadratic_value(&self, x: &[i64]) -> Result<i64> {
        let v = self.inner(x, x)? / 2;
        i64::try_from(v).map_err(|_| Error::InvalidInput("quadratic value overflows i64".into()))
    }

    /// `S x` for an integer vector.
    pub fn apply_gram(&self, x: &[i64]) -> Vec<i64> {
        self.gram
            .iter()
            .map(|row| row.iter().zip(x).map(|(&s, &v)| s * v).sum())
            .collect()
    }

    /// All `x` with `q(x) <= max_q`, grouped by norm, lexicographically sorted.
    pub fn enumerate_by_norm(&self, max_q: u64) -> BTreeMap<u64, Vec<Vec<i64>>> {
        let n = self.rank();
        let d: Vec<f64> = self.ldl_diag.iter().map(rational_to_f64).collect();
        let mu: Vec<Vec<f64>> = self
            .ldl_mu
            .iter()
            .map(|r| r.iter().map(rational_to_f64).collect())
            .collect();
        let mut out: BTreeMap<u64, Vec<Vec<i64>>> = (0..=max_q).map(|k| (k, Vec::new())).collect();
        // 2 q(x) = sum_i d_i y_i^2 with y_i = x_i + sum_{j>i} mu_ij x_j.
        let budget = 2.0 * max_q as f64;
        let slack = 1e-7 * (1.0 + budget);
        let mut x = vec![0i64; n];
        self.fp_search(n, &d, &mu, budget + slack, slack, &mut x, max_q, &mut out);
        for v in out.values_mut() {
            v.sort();
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn fp_search(
        &self,
        level: usize,
        d: &[f64],
        mu: &[Vec<f64>],
        remaining: f64,
        slack: f64,
        x: &mut Vec<i64>,
        max_q: u64,
        out: &mut BTreeMap<u64, Vec<Vec<i64>>>,
    ) {
        if level == 0 {
            let q = self.quadratic_value(x).expect("length matches rank");
            if q >= 0 && (q as u64) <= max_q {
                out.get_mut(&(q as u64)).expect("norm in range").push(x.clone());
            }
            return;
        }
        let i = level - 1;
        let center: f64 = -(i + 1..x.len()).map(|j| mu[i][j] * x[j] as f64).sum::<f64>();
        let radius = (remaining.max(0.0) / d[i]).sqrt();
        let lo = (center - radius - 1e-9).floor() as i64 - 1;
        let hi = (center + radius + 1e-9).ceil() as i64 + 1;
        for xi in lo..=hi {
            let y = xi as f64 - center;
            let used = d[i] * y * y;
            if used > remaining + slack {
                continue;
            }
            x[i] = xi;
            self.fp_search(level - 1, d, mu, remaining - used + slack, slack, x, max_q, out);
        }
        x[i] = 0;
    }

    /// Calls `f(v)` for every `v` in `a + Z^N` with `q(v) <= bound`, in floating
    /// point. Used for theta series with rational characteristics.
    pub fn for_each_shifted_vector(&self, a: &[f64], bound: f64, mut f: impl FnMut(&[f64])) {
        let n = self.rank();
        let d: Vec<f64> = self.ldl_diag.iter().map(rational_to_f64).collect();
        let mu: Vec<Vec<f64>> = self
            .ldl_mu
            .iter()
            .map(|r| r.iter().map(rational_to_f64).collect())
            .collect();
        let mut v = a.to_vec();
        // boundary points must survive rounding
        let slack = 1e-9 * (1.0 + bound.abs());
        shifted_search(n, &d, &mu, a, 2.0 * bound + slack, &mut v, &mut f);
    }

    /// The even lattice with Gram `level * S^{-1}`, whose points `v` correspond
    /// to dual vectors `S^{-1} v` with `q(S^{-1} v) = q_scaled(v) / level`.
    pub fn scaled_dual(&self) -> Result<Lattice> {
        let lev = Rational::from_integer(BigInt::from(self.level));
        let g: Vec<Vec<i64>> = self
            .dual_gram
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| {
                        let s = v * &lev;
                        s.to_integer().to_i64().expect("scaled dual entries are small")
                    })
                    .collect()
            })
            .collect();
        validate_lattice(&format!("{}^v({})", self.name, self.level), g)
    }

    /// Dual vectors with `q(lambda) = (lambda, lambda)/2 <= bound`, as pairs
    /// `(q(lambda), lambda)` in a deterministic order.
    pub fn enumerate_dual(&self, bound: &Rational) -> Result<Vec<(Rational, DualVector)>> {
        let scaled = self.scaled_dual()?;
        let lev = Rational::from_integer(BigInt::from(self.level));
        let scaled_bound = (bound * &lev).floor().to_integer();
        let scaled_bound = scaled_bound.to_u64().unwrap_or(0);
        let mut out = Vec::new();
        for (qv, vs) in scaled.enumerate_by_norm(scaled_bound) {
            let norm = Rational::new(BigInt::from(qv), BigInt::from(self.level));
            for v in vs {
                out.push((norm.clone(), DualVector::from_dual_coordinates(self, &v)));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        Ok(out)
    }
}

fn shifted_search(
    level: usize,
    d: &[f64],
    mu: &[Vec<f64>],
    a: &[f64],
    remaining: f64,
    v: &mut Vec<f64>,
    f: &mut impl FnMut(&[f64]),
) {
    if level == 0 {
        f(v);
        return;
    }
    let i = level - 1;
    let offset: f64 = (i + 1..v.len()).map(|j| mu[i][j] * v[j]).sum();
    let radius = (remaining.max(0.0) / d[i]).sqrt() + 1e-9;
    // v_i = x_i + a_i ranges over |v_i + offset| <= radius
    let lo = (-offset - radius - a[i]).ceil() as i64;
    let hi = (-offset + radius - a[i]).floor() as i64;
    for xi in lo..=hi {
        let vi = xi as f64 + a[i];
        let y = vi + offset;
        let used = d[i] * y * y;
        if used > remaining {
            continue;
        }
        v[i] = vi;
        shifted_search(level - 1, d, mu, a, (remaining - used).max(0.0), v, f);
    }
    v[i] = a[i];
}

/// A point of `S^{-1} Z^N`, stored as `numer / denom` with `denom >= 1` and
/// `gcd(numer..., denom) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DualVector {
    numer: Vec<i64>,
    denom: u64,
}

impl DualVector {
    pub fn new(numer: Vec<i64>, denom: u64) -> Self {
        assert!(denom >= 1, "denominator must be positive");
        let g = numer
            .iter()
            .fold(denom as i64, |g, &v| g.gcd(&v))
            .unsigned_abs()
            .max(1);
        Self {
            numer: numer.into_iter().map(|v| v / g as i64).collect(),
            denom: denom / g,
        }
    }

    pub fn from_integer(x: &[i64]) -> Self {
        Self::new(x.to_vec(), 1)
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![0; n], 1)
    }

    pub fn from_rationals(coords: &[Rational]) -> Self {
        let den = coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let numer = coords
            .iter()
            .map(|c| (c * Rational::from_integer(den.clone())).to_integer().to_i64().expect("small coordinates"))
            .collect();
        Self::new(numer, den.to_u64().expect("small denominator"))
    }

    /// `lambda = S^{-1} v`.
    pub fn from_dual_coordinates(lattice: &Lattice, v: &[i64]) -> Self {
        let coords: Vec<Rational> = lattice
            .dual_gram()
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .map(|(s, &vi)| s * Rational::from_integer(BigInt::from(vi)))
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .collect();
        Self::from_rationals(&coords)
    }

    pub fn rank(&self) -> usize {
        self.numer.len()
    }

    pub fn numer(&self) -> &[i64] {
        &self.numer
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn coords(&self) -> Vec<Rational> {
        self.numer
            .iter()
            .map(|&v| Rational::new(BigInt::from(v), BigInt::from(self.denom)))
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.denom == 1
    }

    pub fn as_integer(&self) -> Option<&[i64]> {
        self.is_integral().then_some(&self.numer[..])
    }

    pub fn scale(&self, m: i64) -> Self {
        Self::new(self.numer.iter().map(|&v| v * m).collect(), self.denom)
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    /// `S lambda`, an integer vector; errors if `lambda` is not in the dual lattice.
    pub fn s_lambda(&self, lattice: &Lattice) -> Result<Vec<i64>> {
        if self.rank() != lattice.rank() {
            return Err(Error::DimensionMismatch {
                expected: lattice.rank(),
                found: self.rank(),
            });
        }
        let raw = lattice.apply_gram(&self.numer);
        raw.iter()
            .map(|&v| {
                if v % self.denom as i64 == 0 {
                    Ok(v / self.denom as i64)
                } else {
                    Err(Error::InvalidInput(format!("{self} is not in the dual lattice")))
                }
            })
            .collect()
    }

    /// `(lambda, lambda)_S / 2`.
    pub fn norm(&self, lattice: &Lattice) -> Rational {
        let num = lattice
            .inner(&self.numer, &self.numer)
            .expect("rank checked by caller");
        Rational::new(BigInt::from(num), BigInt::from(2u64 * self.denom * self.denom))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coords().iter().map(format_rational).collect()
    }
}

impl Ord for DualVector {
    fn cmp(&self, other: &Self) -> Ordering {
        // Compare rational coordinates lexicographically: a/d vs b/e via a*e vs b*d.
        for (a, b) in self.numer.iter().zip(&other.numer) {
            let l = *a as i128 * other.denom as i128;
            let r = *b as i128 * self.denom as i128;
            match l.cmp(&r) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.numer.len().cmp(&other.numer.len())
    }
}

impl PartialOrd for DualVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DualVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if c.is_integer() {
                write!(f, "{}", c.numer())?;
            } else {
                write!(f, "{}/{}", c.numer(), c.denom())?;
            }
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{divisor_sigma, int};
    use proptest::prelude::*;

    fn box_count(lattice: &Lattice, max_q: i64, bound: i64) -> BTreeMap<u64, usize> {
        // Independent oracle: exhaustive box search with a generous bound.
        let n = lattice.rank();
        let mut counts = BTreeMap::new();
        let mut x = vec![-bound; n];
        loop {
            let q = lattice.quadratic_value(&x).unwrap();
            if q <= max_q {
                *counts.entry(q as u64).or_insert(0) += 1;
            }
            let mut i = 0;
            loop {
                if i == n {
                    return counts;
                }
                x[i] += 1;
                if x[i] > bound {
                    x[i] = -bound;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn validate_examples() {
        let a1 = validate_lattice("A1", vec![vec![2]]).unwrap();
        assert_eq!((a1.rank(), a1.det().clone(), a1.level()), (1, BigInt::from(2), 4));
        let l = preset("4A1").unwrap();
        assert_eq!((l.det().clone(), l.level()), (BigInt::from(16), 4));
        let e8 = preset("E8").unwrap();
        assert_eq!((e8.det().clone(), e8.level()), (BigInt::from(1), 1));
        let d4 = preset("D4").unwrap();
        assert_eq!((d4.det().clone(), d4.level()), (BigInt::from(4), 2));
    }

    #[test]
    fn validate_errors() {
        assert_eq!(
            validate_lattice("x", vec![vec![2, 1], vec![0, 2]]),
            Err(Error::NotSymmetric { row: 0, col: 1 })
        );
        assert_eq!(
            validate_lattice("x", vec![vec![2, 0], vec![0, 3]]),
            Err(Error::NotEven { index: 1 })
        );
        assert_eq!(
            validate_lattice("x", vec![vec![2, 3], vec![3, 2]]),
            Err(Error::NotPositiveDefinite { order: 2 })
        );
        assert_eq!(
            validate_lattice("x", vec![vec![-2]]),
            Err(Error::NotPositiveDefinite { order: 1 })
        );
        assert!(matches!(
            validate_lattice("x", vec![vec![2, 0], vec![0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quadratic_value_examples() {
        let l = preset("4A1").unwrap();
        assert_eq!(l.quadratic_value(&[1, 0, 0, 0]).unwrap(), 1);
        assert_eq!(l.quadratic_value(&[1, 1, 1, 1]).unwrap(), 4);
        assert_eq!(preset("E8").unwrap().quadratic_value(&[0; 8]).unwrap(), 0);
        assert!(matches!(l.quadratic_value(&[1, 0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn enumerate_examples() {
        let e8 = preset("E8").unwrap();
        let z = e8.enumerate_by_norm(0);
        assert_eq!(z[&0], vec![vec![0i64; 8]]);
        let two = preset("2A1").unwrap().enumerate_by_norm(1);
        assert_eq!(two[&1], vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn e8_shell_counts_match_sigma3() {
        let e8 = preset("E8").unwrap();
        let shells = e8.enumerate_by_norm(4);
        for n in 1..=4u64 {
            let expected = int(240) * divisor_sigma(3, n);
            assert_eq!(int(shells[&n].len() as i64), expected, "n={n}");
        }
        assert_eq!(shells[&1].len(), 240);
    }

    #[test]
    fn enumeration_matches_box_oracle_on_d4() {
        let d4 = preset("D4").unwrap();
        let fp = d4.enumerate_by_norm(3);
        // D4 minimal eigenvalue exceeds 0.26, so |x_i| <= 6 covers q <= 3 comfortably
        let boxed = box_count(&d4, 3, 6);
        for n in 0..=3u64 {
            assert_eq!(fp[&n].len(), *boxed.get(&n).unwrap_or(&0), "n={n}");
        }
    }

    #[test]
    fn shifted_enumeration() {
        let e8 = preset("E8").unwrap();
        let mut count = 0;
        e8.for_each_shifted_vector(&[0.0; 8], 2.0, |_| count += 1);
        assert_eq!(count, 1 + 240 + 2160);
        let l = preset("2A1").unwrap();
        let mut seen = Vec::new();
        l.for_each_shifted_vector(&[0.5, 0.5], 2.0, |v| seen.push(v.to_vec()));
        seen.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(seen, vec![vec![-0.5, -0.5], vec![-0.5, 0.5], vec![0.5, -0.5], vec![0.5, 0.5]]);
        let d4 = preset("D4").unwrap();
        let a = [0.25, -0.5, 0.0, 0.75];
        let mut fast = 0;
        d4.for_each_shifted_vector(&a, 3.0, |_| fast += 1);
        let mut slow = 0;
        let r = -6i64..=6;
        for x0 in r.clone() {
            for x1 in r.clone() {
                for x2 in r.clone() {
                    for x3 in r.clone() {
                        let v = [x0 as f64 + a[0], x1 as f64 + a[1], x2 as f64 + a[2], x3 as f64 + a[3]];
                        let q: f64 = (0..4)
                            .map(|i| (0..4).map(|j| v[i] * d4.gram()[i][j] as f64 * v[j]).sum::<f64>())
                            .sum::<f64>()
                            / 2.0;
                        if q <= 3.0 {
                            slow += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn dual_enumeration_of_4a1() {
        let l = preset("4A1").unwrap();
        let v = l.enumerate_dual(&Rational::new(BigInt::from(1), BigInt::from(1))).unwrap();
        // lambda in (1/2)Z^4 with sum lambda_i^2 <= 1
        let count = v.len();
        // 1 (zero) + 8 (one half) + 24 (two) + 32 (three) + 16 (four halves) + 8 (+-e_i)
        assert_eq!(count, 1 + 8 + 24 + 32 + 16 + 8);
        for (norm, lam) in &v {
            assert_eq!(*norm, lam.norm(&l));
            assert!(lam.s_lambda(&l).is_ok());
        }
    }

    #[test]
    fn dual_vector_ordering_and_reduction() {
        let a = DualVector::new(vec![2, 4], 4);
        assert_eq!(a, DualVector::new(vec![1, 2], 2));
        let b = DualVector::new(vec![1, 0], 1);
        assert!(a < b);
        assert_eq!(a.to_strings(), vec!["1/2", "1/1"]);
    }

    fn small_even_gram() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..=4).prop_flat_map(|n| {
            proptest::collection::vec(-6i64..=6, n * n).prop_map(move |raw| {
                let mut g = vec![vec![0i64; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        let v = raw[i.min(j) * n + i.max(j)];
                        g[i][j] = if i == j { 2 * (v.abs() / 2).max(1) } else { v };
                    }
                }
                g
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn level_divides_twice_det(g in small_even_gram()) {
            if let Ok(l) = validate_lattice("r", g) {
                let two_det = BigInt::from(2) * l.det();
                prop_assert!((two_det % BigInt::from(l.level())).is_zero());
                // level * S^{-1} is integral with even diagonal, and no proper divisor works
                let lev = l.level();
                let ok = |mu: u64| {
                    l.dual_gram().iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, v)| {
                        let s = v * Rational::from_integer(BigInt::from(mu));
                        s.is_integer() && (i != j || s.to_integer().is_even())
                    }))
                };
                prop_assert!(ok(lev));
                for mu in 1..lev {
                    prop_assert!(!ok(mu));
                }
            }
        }

        #[test]
        fn enumeration_invariant_under_permutation(g in small_even_gram(), seed in 0usize..24) {
            if let Ok(l) = validate_lattice("r", g.clone()) {
                let n = g.len();
                let mut perm: Vec<usize> = (0..n).collect();
                let mut s = seed;
                for i in (1..n).rev() {
                    perm.swap(i, s % (i + 1));
                    s /= i + 1;
                }
                let pg: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| g[perm[i]][perm[j]]).collect()).collect();
                let pl = validate_lattice("p", pg).unwrap();
                let a = l.enumerate_by_norm(4);
                let b = pl.enumerate_by_norm(4);
                for k in 0..=4u64 {
                    prop_assert_eq!(a[&k].len(), b[&k].len());
                }
            }
        }
    }
}
