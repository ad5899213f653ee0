//! Value distributions of integer quadratic polynomials modulo `a`.
//!
//! Modulo a prime power `p^e` the quadratic part is split into orthogonal
//! blocks by unipotent changes of variables (a Jordan splitting): 1x1 blocks
//! for odd `p`, and 1x1 or 2x2 blocks for `p = 2`. The value histogram of the
//! polynomial is then the cyclic convolution of the per-block histograms. For
//! composite `a` the histograms of the prime-power factors are recombined
//! through the Chinese remainder theorem. A naive enumerator over all residue
//! vectors is kept as an independent oracle.

use num_complex::Complex64;

use crate::arith::{factorize, mod_inverse};
use crate::error::{Error, Result};

/// Default ceiling on residue evaluations, overridable through `JE_BUDGET`.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

pub fn default_ceiling() -> u64 {
    std::env::var("JE_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|v| *v >= 1.0)
        .map(|v| v as u64)
        .unwrap_or(DEFAULT_BUDGET)
}

/// `f(y) = sum_i h_i y_i^2 + sum_{i<j} b_ij y_i y_j + g . y + c` over the integers.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadPoly {
    pub half_diag: Vec<i128>,
    /// Symmetric; the diagonal is ignored.
    pub off: Vec<Vec<i128>>,
    pub lin: Vec<i128>,
    pub constant: i128,
}

impl QuadPoly {
    /// `scale * (1/2) x^T S x` for an even Gram matrix `S`.
    pub fn from_gram(gram: &[Vec<i64>], scale: i64) -> Self {
        let n = gram.len();
        let half_diag = (0..n).map(|i| scale as i128 * (gram[i][i] / 2) as i128).collect();
        let off = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 0 } else { scale as i128 * gram[i][j] as i128 })
                    .collect()
            })
            .collect();
        Self {
            half_diag,
            off,
            lin: vec![0; n],
            constant: 0,
        }
    }

    /// `sum_i x_{2i} x_{2i+1}`, the orthogonal sum of `n/2` hyperbolic planes.
    pub fn hyperbolic(n: usize) -> Self {
        let mut off = vec![vec![0i128; n]; n];
        for i in (0..n.saturating_sub(1)).step_by(2) {
            off[i][i + 1] = 1;
            off[i + 1][i] = 1;
        }
        Self {
            half_diag: vec![0; n],
            off,
            lin: vec![0; n],
            constant: 0,
        }
    }

    pub fn with_linear(mut self, lin: Vec<i128>, constant: i128) -> Self {
        assert_eq!(lin.len(), self.rank(), "linear term length");
        self.lin = lin;
        self.constant = constant;
        self
    }

    pub fn rank(&self) -> usize {
        self.half_diag.len()
    }

    pub fn scaled_quadratic(&self, s: i128) -> Self {
        let mut out = self.clone();
        for h in &mut out.half_diag {
            *h *= s;
        }
        for row in &mut out.off {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn eval(&self, y: &[i128]) -> i128 {
        let n = self.rank();
        let mut acc = self.constant;
        for i in 0..n {
            acc += self.half_diag[i] * y[i] * y[i] + self.lin[i] * y[i];
            for j in i + 1..n {
                acc += self.off[i][j] * y[i] * y[j];
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
enum BlockQuad {
    One { h: i128 },
    Two { hi: i128, b: i128, hj: i128 },
}

#[derive(Debug, Clone, PartialEq)]
struct Block {
    vars: Vec<usize>,
    quad: BlockQuad,
}

/// A Jordan splitting of the quadratic part of a polynomial modulo `p^e`.
///
/// The substitution `y = T y'` has `det T = 1` and makes the quadratic part a
/// sum of independent blocks; the linear term becomes `T^t g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    modulus: i128,
    transform: Vec<Vec<i128>>,
    blocks: Vec<Block>,
}

fn valuation(r: i128, p: i128, e: u32) -> u32 {
    if r == 0 {
        return e;
    }
    let mut r = r;
    let mut v = 0;
    while r % p == 0 && v < e {
        r /= p;
        v += 1;
    }
    v
}

fn pow_i128(p: i128, e: u32) -> i128 {
    (0..e).fold(1i128, |acc, _| acc * p)
}

struct Splitter {
    p: i128,
    e: u32,
    m: i128,
    h: Vec<i128>,
    b: Vec<Vec<i128>>,
    t: Vec<Vec<i128>>,
}

impl Splitter {
    fn md(&self, v: i128) -> i128 {
        v.rem_euclid(self.m)
    }

    /// Substitute `y_i = y_i' + alpha y_k'`.
    fn shear(&mut self, i: usize, k: usize, alpha: i128) {
        let alpha = self.md(alpha);
        if alpha == 0 {
            return;
        }
        let n = self.h.len();
        let hk = self.h[k] + alpha * self.b[i][k] + self.md(alpha * alpha) * self.h[i];
        self.h[k] = self.md(hk);
        for x in 0..n {
            if x != i && x != k {
                let v = self.md(self.b[k][x] + alpha * self.b[i][x]);
                self.b[k][x] = v;
                self.b[x][k] = v;
            }
        }
        let v = self.md(self.b[i][k] + 2 * alpha * self.h[i]);
        self.b[i][k] = v;
        self.b[k][i] = v;
        for row in 0..n {
            let v = self.md(self.t[row][k] + alpha * self.t[row][i]);
            self.t[row][k] = v;
        }
    }

    fn val(&self, r: i128) -> u32 {
        valuation(r, self.p, self.e)
    }

    fn run(mut self) -> Decomposition {
        let mut active: Vec<usize> = (0..self.h.len()).collect();
        let mut blocks = Vec::new();
        while !active.is_empty() {
            let (vd, di) = active
                .iter()
                .map(|&i| (self.val(self.h[i]), i))
                .min()
                .expect("non-empty");
            let vo = active
                .iter()
                .flat_map(|&i| active.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
                .map(|(i, j)| (self.val(self.b[i][j]), i, j))
                .min();
            let (vo, oi, oj) = vo.unwrap_or((self.e, usize::MAX, usize::MAX));
            if vd >= self.e && vo >= self.e {
                for &i in &active {
                    blocks.push(Block {
                        vars: vec![i],
                        quad: BlockQuad::One { h: 0 },
                    });
                }
                break;
            }
            if self.p != 2 {
                let piv = if vd <= vo {
                    di
                } else {
                    self.shear(oi, oj, 1);
                    oj
                };
                let v = self.val(self.h[piv]);
                let sub = pow_i128(self.p, self.e - v);
                let unit = (2 * self.h[piv] / pow_i128(self.p, v)).rem_euclid(sub);
                let inv = mod_inverse(unit, sub).expect("unit modulo p^(e-v)");
                for &k in active.iter().filter(|&&k| k != piv) {
                    let w = self.b[piv][k] / pow_i128(self.p, v);
                    self.shear(piv, k, -w * inv % sub);
                }
                blocks.push(Block {
                    vars: vec![piv],
                    quad: BlockQuad::One { h: self.h[piv] },
                });
                active.retain(|&k| k != piv);
            } else if vd < vo {
                let piv = di;
                let v2 = vd + 1;
                if v2 < self.e {
                    let sub = pow_i128(2, self.e - v2);
                    let unit = (2 * self.h[piv] / pow_i128(2, v2)).rem_euclid(sub);
                    let inv = mod_inverse(unit, sub).expect("odd unit");
                    for &k in active.iter().filter(|&&k| k != piv) {
                        let w = self.b[piv][k] / pow_i128(2, v2);
                        self.shear(piv, k, -w * inv % sub);
                    }
                }
                blocks.push(Block {
                    vars: vec![piv],
                    quad: BlockQuad::One { h: self.h[piv] },
                });
                active.retain(|&k| k != piv);
            } else {
                let (i, j) = (oi, oj);
                let scale = pow_i128(2, vo);
                let sub = pow_i128(2, self.e - vo);
                let a = 2 * self.h[i] / scale;
                let c = 2 * self.h[j] / scale;
                let u = self.b[i][j] / scale;
                let det = (a * c - u * u).rem_euclid(sub);
                let dinv = mod_inverse(det, sub).expect("odd determinant");
                for &k in active.iter().filter(|&&k| k != i && k != j) {
                    let ri = -(self.b[i][k] / scale);
                    let rj = -(self.b[j][k] / scale);
                    let alpha = (dinv * ((c * ri - u * rj) % sub)).rem_euclid(sub);
                    let beta = (dinv * ((a * rj - u * ri) % sub)).rem_euclid(sub);
                    self.shear(i, k, alpha);
                    self.shear(j, k, beta);
                }
                blocks.push(Block {
                    vars: vec![i, j],
                    quad: BlockQuad::Two {
                        hi: self.h[i],
                        b: self.b[i][j],
                        hj: self.h[j],
                    },
                });
                active.retain(|&k| k != i && k != j);
            }
        }
        Decomposition {
            modulus: self.m,
            transform: self.t,
            blocks,
        }
    }
}

impl Decomposition {
    /// Split the quadratic part of `poly` modulo `p^e`.
    pub fn new(poly: &QuadPoly, p: u64, e: u32) -> Self {
        let n = poly.rank();
        let p = p as i128;
        let m = pow_i128(p, e);
        let s = Splitter {
            p,
            e,
            m,
            h: poly.half_diag.iter().map(|v| v.rem_euclid(m)).collect(),
            b: poly
                .off
                .iter()
                .map(|r| r.iter().map(|v| v.rem_euclid(m)).collect())
                .collect(),
            t: (0..n)
                .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
                .collect(),
        };
        s.run()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus as u64
    }

    /// Residue evaluations needed by [`Decomposition::histogram`].
    pub fn work(&self) -> u128 {
        let m = self.modulus as u128;
        self.blocks
            .iter()
            .map(|b| if b.vars.len() == 1 { m } else { m * m })
            .sum::<u128>()
            + self.blocks.len() as u128 * m * m
    }

    /// Histogram of `poly(y) mod p^e` over all `y` modulo `p^e`, using this
    /// splitting of the quadratic part of `poly`.
    pub fn histogram(&self, lin: &[i128], constant: i128) -> Vec<u128> {
        let m = self.modulus;
        let mu = m as usize;
        let n = lin.len();
        let g: Vec<i128> = (0..n)
            .map(|k| (0..n).map(|j| self.transform[j][k] * lin[j].rem_euclid(m)).sum::<i128>().rem_euclid(m))
            .collect();
        let mut acc = vec![0u128; mu];
        acc[0] = 1;
        for block in &self.blocks {
            let mut h = vec![0u128; mu];
            match block.quad {
                BlockQuad::One { h: a } => {
                    let gi = g[block.vars[0]];
                    for y in 0..m {
                        h[((a * y + gi) % m * y % m) as usize] += 1;
                    }
                }
                BlockQuad::Two { hi, b, hj } => {
                    let (gi, gj) = (g[block.vars[0]], g[block.vars[1]]);
                    for yj in 0..m {
                        let base = (hj * yj + gj) % m * yj % m;
                        let lin_i = (b * yj + gi) % m;
                        for yi in 0..m {
                            h[((hi * yi + lin_i) % m * yi % m + base) as usize % mu] += 1;
                        }
                    }
                }
            }
            acc = cyclic_convolve(&acc, &h);
        }
        let shift = constant.rem_euclid(m) as usize;
        let mut out = vec![0u128; mu];
        for (v, c) in acc.into_iter().enumerate() {
            out[(v + shift) % mu] += c;
        }
        out
    }
}

fn cyclic_convolve(a: &[u128], b: &[u128]) -> Vec<u128> {
    let m = a.len();
    let mut out = vec![0u128; m];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[(i + j) % m] += x * y;
            }
        }
    }
    out
}

fn check_modulus(poly: &QuadPoly, modulus: u64) -> Result<()> {
    if modulus == 0 {
        return Err(Error::InvalidInput("modulus must be positive".into()));
    }
    if modulus > (1u64 << 31) {
        return Err(Error::BudgetExceeded {
            needed: modulus as u128,
            ceiling: 1u64 << 31,
        });
    }
    let total = (modulus as u128).checked_pow(poly.rank() as u32);
    if total.is_none() {
        return Err(Error::BudgetExceeded {
            needed: u128::MAX,
            ceiling: u64::MAX,
        });
    }
    Ok(())
}

fn prime_power_parts(poly: &QuadPoly, modulus: u64, ceiling: u64) -> Result<Vec<(u64, Decomposition)>> {
    check_modulus(poly, modulus)?;
    let parts: Vec<(u64, Decomposition)> = factorize(modulus)
        .into_iter()
        .map(|(p, e)| (p.pow(e), Decomposition::new(poly, p, e)))
        .collect();
    let work: u128 = parts.iter().map(|(_, d)| d.work()).sum::<u128>() + modulus as u128;
    if work > ceiling as u128 {
        return Err(Error::BudgetExceeded {
            needed: work,
            ceiling,
        });
    }
    Ok(parts)
}

/// Histogram of `poly(y) mod modulus` over `y` in `(Z/modulus)^N`.
pub fn value_histogram(poly: &QuadPoly, modulus: u64, ceiling: u64) -> Result<Vec<u128>> {
    let parts = prime_power_parts(poly, modulus, ceiling)?;
    let hists: Vec<(u64, Vec<u128>)> = parts
        .iter()
        .map(|(q, d)| (*q, d.histogram(&poly.lin, poly.constant)))
        .collect();
    Ok((0..modulus)
        .map(|v| hists.iter().map(|(q, h)| h[(v % q) as usize]).product())
        .collect())
}

/// `#{y mod a : poly(y) = 0 mod a}`.
pub fn count_zeros(poly: &QuadPoly, modulus: u64, ceiling: u64) -> Result<u128> {
    let parts = prime_power_parts(poly, modulus, ceiling)?;
    Ok(parts
        .iter()
        .map(|(_, d)| d.histogram(&poly.lin, poly.constant)[0])
        .product())
}

/// `sum_{y mod c} exp(2 pi i poly(y) / c)`.
pub fn exponential_sum(poly: &QuadPoly, modulus: u64, ceiling: u64) -> Result<Complex64> {
    let hist = value_histogram(poly, modulus, ceiling)?;
    Ok(histogram_exponential_sum(&hist))
}

pub fn histogram_exponential_sum(hist: &[u128]) -> Complex64 {
    let c = hist.len() as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for (v, &count) in hist.iter().enumerate() {
        if count != 0 {
            let ang = 2.0 * std::f64::consts::PI * v as f64 / c;
            re += count as f64 * ang.cos();
            im += count as f64 * ang.sin();
        }
    }
    Complex64::new(re, im)
}

/// Independent oracle: evaluate `poly` on every residue vector.
pub fn count_zeros_naive(poly: &QuadPoly, modulus: u64, ceiling: u64) -> Result<u128> {
    let n = poly.rank();
    let space = (modulus as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if space > ceiling as u128 {
        return Err(Error::BudgetExceeded {
            needed: space,
            ceiling,
        });
    }
    let m = modulus as i128;
    let mut y = vec![0i128; n];
    let mut count = 0u128;
    loop {
        if poly.eval(&y).rem_euclid(m) == 0 {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(count);
            }
            y[i] += 1;
            if y[i] == m {
                y[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{d4_gram, e8_gram, na1_gram};
    use proptest::prelude::*;

    fn naive_histogram(poly: &QuadPoly, m: u64) -> Vec<u128> {
        let n = poly.rank();
        let mut h = vec![0u128; m as usize];
        let mut y = vec![0i128; n];
        loop {
            h[poly.eval(&y).rem_euclid(m as i128) as usize] += 1;
            let mut i = 0;
            loop {
                if i == n {
                    return h;
                }
                y[i] += 1;
                if y[i] == m as i128 {
                    y[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn histograms_match_naive_on_presets() {
        for (gram, mods) in [
            (d4_gram(), vec![2u64, 3, 4, 8, 9, 12, 16]),
            (na1_gram(3), vec![2, 4, 5, 8, 25, 27]),
        ] {
            let poly = QuadPoly::from_gram(&gram, 1).with_linear(vec![1; gram.len()], 3);
            for m in mods {
                assert_eq!(value_histogram(&poly, m, u64::MAX).unwrap(), naive_histogram(&poly, m), "m={m}");
            }
        }
    }

    #[test]
    fn e8_mod_2_count() {
        let poly = QuadPoly::from_gram(&e8_gram(), 1);
        assert_eq!(count_zeros(&poly, 2, u64::MAX).unwrap(), 136);
        assert_eq!(count_zeros_naive(&poly, 2, u64::MAX).unwrap(), 136);
    }

    #[test]
    fn budget_is_enforced() {
        let poly = QuadPoly::from_gram(&e8_gram(), 1);
        assert!(matches!(count_zeros(&poly, 4096, 1000), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(count_zeros_naive(&poly, 20, 1000), Err(Error::BudgetExceeded { .. })));
    }

    fn small_poly() -> impl Strategy<Value = QuadPoly> {
        (1usize..=3).prop_flat_map(|n| {
            (
                proptest::collection::vec(-20i128..=20, n),
                proptest::collection::vec(-20i128..=20, n * n),
                proptest::collection::vec(-20i128..=20, n),
                -30i128..=30,
            )
                .prop_map(move |(h, off, lin, c)| {
                    let mut b = vec![vec![0i128; n]; n];
                    for i in 0..n {
                        for j in i + 1..n {
                            b[i][j] = off[i * n + j];
                            b[j][i] = off[i * n + j];
                        }
                    }
                    QuadPoly {
                        half_diag: h,
                        off: b,
                        lin,
                        constant: c,
                    }
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn splitting_preserves_value_distribution(poly in small_poly(), m in prop::sample::select(vec![2u64, 3, 4, 5, 6, 8, 9, 12, 16, 18, 25, 27, 32])) {
            prop_assert_eq!(value_histogram(&poly, m, u64::MAX).unwrap(), naive_histogram(&poly, m));
        }
    }
}
