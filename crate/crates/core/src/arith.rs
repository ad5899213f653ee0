//! Exact integer and rational arithmetic.
//!
//! Bernoulli numbers (with `B_1 = -1/2`), divisor sums with rational exponents,
//! the Möbius and Kronecker symbols, generalized Bernoulli numbers for the two
//! characters modulo 4, and `PiRational`, which keeps a rational multiple of a
//! power of `π` symbolic so that cancellations of `π` are checked structurally.

use std::fmt;
use std::ops::{Div, Mul, Neg};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `base^exp` for any integer exponent; `base` must be nonzero when `exp < 0`.
pub fn pow_rat(base: i64, exp: i64) -> Rational {
    let b = int(base);
    if exp >= 0 {
        num_traits::pow(b, exp as usize)
    } else {
        num_traits::pow(b.recip(), (-exp) as usize)
    }
}

pub fn rational_pow(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Serializes as `"p/q"`, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through logarithms for huge numerators/denominators.
        let sign = if r.is_negative() { -1.0 } else { 1.0 };
        let ln = |b: &BigInt| {
            let bits = b.bits();
            let shift = bits.saturating_sub(60);
            let top = (b.abs() >> shift).to_f64().unwrap_or(0.0);
            top.ln() + shift as f64 * std::f64::consts::LN_2
        };
        sign * (ln(r.numer()) - ln(r.denom())).exp()
    })
}

fn bernoulli_cache() -> &'static Mutex<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![Rational::one()]))
}

/// Bernoulli number `B_n` with `B_1 = -1/2`.
pub fn bernoulli(n: usize) -> Rational {
    let mut table = bernoulli_cache().lock().expect("bernoulli cache poisoned");
    while table.len() <= n {
        let m = table.len();
        // sum_{j<=m} C(m+1, j) B_j = 0
        let mut acc = Rational::zero();
        let mut binom = BigInt::one();
        for (j, b) in table.iter().enumerate() {
            acc += Rational::from_integer(binom.clone()) * b;
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        let next = -acc / Rational::from_integer(BigInt::from(m + 1));
        table.push(next);
    }
    table[n].clone()
}

/// Bernoulli polynomial `B_n(x) = sum_j C(n,j) B_j x^{n-j}`.
pub fn bernoulli_polynomial(n: usize, x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    let mut binom = BigInt::one();
    for j in 0..=n {
        acc += Rational::from_integer(binom.clone()) * bernoulli(j) * rational_pow(x, (n - j) as i64);
        binom = binom * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// `sigma_s(n) = sum_{d | n} d^s`, exact for negative `s`.
pub fn divisor_sigma(s: i64, n: u64) -> Rational {
    assert!(n >= 1, "divisor_sigma needs n >= 1");
    factorize(n)
        .into_iter()
        .map(|(p, e)| {
            (0..=e as i64)
                .map(|j| pow_rat(p as i64, s * j))
                .fold(Rational::zero(), |a, b| a + b)
        })
        .fold(Rational::one(), |a, b| a * b)
}

pub fn mobius(n: u64) -> i64 {
    assert!(n >= 1, "mobius needs n >= 1");
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Trial division; primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize needs n >= 1");
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

/// p-adic valuation; `None` for zero.
pub fn ord_p(n: i64, p: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let p = p as i64;
    let mut n = n;
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    Some(e)
}

pub fn ord_p_big(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut e = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        e += 1;
    }
    Some(e)
}

/// Kronecker symbol `(a / n)` for `n >= 1`; the Legendre symbol at odd primes.
pub fn kronecker(a: i64, n: u64) -> i64 {
    assert!(n >= 1, "kronecker needs n >= 1");
    let mut result = 1i64;
    let mut a = a as i128;
    let mut n = n as i128;
    // factor out powers of two from n: (a/2) = 0 if a even, else (-1)^{(a^2-1)/8}
    while n % 2 == 0 {
        n /= 2;
        if a % 2 == 0 {
            return 0;
        }
        let r = a.rem_euclid(8);
        if r == 3 || r == 5 {
            result = -result;
        }
    }
    // Jacobi symbol (a / n) for odd n
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// The two quadratic characters modulo 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirichletCharacterMod4 {
    /// `a -> 1` on odd `a` (D = 1).
    Principal,
    /// `chi_{-4}(a) = (-1)^{(a-1)/2}` on odd `a` (D = -1).
    Odd,
}

impl DirichletCharacterMod4 {
    pub fn from_discriminant_sign(d_positive: bool) -> Self {
        if d_positive {
            Self::Principal
        } else {
            Self::Odd
        }
    }

    pub fn value(self, a: i64) -> i64 {
        if a.rem_euclid(2) == 0 {
            return 0;
        }
        match self {
            Self::Principal => 1,
            Self::Odd => {
                if a.rem_euclid(4) == 1 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn is_even(self) -> bool {
        matches!(self, Self::Principal)
    }
}

/// `B_{n,chi} = 4^{n-1} sum_{a=1}^{4} chi(a) B_n(a/4)`.
pub fn generalized_bernoulli(n: usize, chi: DirichletCharacterMod4) -> Rational {
    assert!(n >= 1, "generalized_bernoulli needs n >= 1");
    let f = 4i64;
    let sum = (1..=f)
        .filter(|&a| chi.value(a) != 0)
        .map(|a| int(chi.value(a)) * bernoulli_polynomial(n, &rat(a, f)))
        .fold(Rational::zero(), |x, y| x + y);
    pow_rat(f, n as i64 - 1) * sum
}

/// `L(1 - n, chi) = -B_{n,chi} / n`.
pub fn l_value_negative(n: usize, chi: DirichletCharacterMod4) -> Rational {
    -generalized_bernoulli(n, chi) / int(n as i64)
}

/// `zeta(2m) = (-1)^{m+1} (2 pi)^{2m} B_{2m} / (2 (2m)!)`.
pub fn zeta_even(n: usize) -> PiRational {
    assert!(n >= 2 && n.is_multiple_of(2), "zeta_even needs an even argument >= 2");
    let m = n / 2;
    let sign = if (m + 1).is_multiple_of(2) { 1 } else { -1 };
    let coeff = int(sign) * pow_rat(2, n as i64) * bernoulli(n)
        / (int(2) * Rational::from_integer(factorial(n as u64)));
    PiRational::new(coeff, n as i32)
}

/// `L(n, chi)` at a positive integer of matching parity, exactly.
///
/// Principal character (n even): `zeta(n)(1 - 2^{-n})`. Odd character (n odd):
/// `(-1)^{(n+1)/2} (pi/2)^n B_{n,chi} / n!`.
pub fn l_value_positive(n: usize, chi: DirichletCharacterMod4) -> Option<PiRational> {
    match chi {
        DirichletCharacterMod4::Principal if n >= 2 && n.is_multiple_of(2) => {
            Some(zeta_even(n) * PiRational::rational(Rational::one() - pow_rat(2, -(n as i64))))
        }
        DirichletCharacterMod4::Odd if n % 2 == 1 => {
            let sign = if n.div_ceil(2).is_multiple_of(2) { 1 } else { -1 };
            let coeff = int(sign) * pow_rat(2, -(n as i64)) * generalized_bernoulli(n, chi)
                / Rational::from_integer(factorial(n as u64));
            Some(PiRational::new(coeff, n as i32))
        }
        _ => None,
    }
}

/// A value `coeff * pi^pi_power`, kept symbolic.
///
/// Equality is structural: two values are equal exactly when both the rational
/// coefficient and the power of `pi` agree. Zero is canonically `0 * pi^0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PiRational {
    coeff: Rational,
    pi_power: i32,
}

impl PiRational {
    pub fn new(coeff: Rational, pi_power: i32) -> Self {
        if coeff.is_zero() {
            Self::zero()
        } else {
            Self { coeff, pi_power }
        }
    }

    pub fn rational(coeff: Rational) -> Self {
        Self::new(coeff, 0)
    }

    pub fn zero() -> Self {
        Self {
            coeff: Rational::zero(),
            pi_power: 0,
        }
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn pi_power(&self) -> i32 {
        self.pi_power
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// The rational value when no power of `pi` remains.
    pub fn as_rational(&self) -> Option<&Rational> {
        (self.pi_power == 0).then_some(&self.coeff)
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.coeff) * std::f64::consts::PI.powi(self.pi_power)
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero PiRational");
        Self::new(self.coeff.recip(), -self.pi_power)
    }

    pub fn pow(&self, e: u32) -> Self {
        Self::new(num_traits::pow(self.coeff.clone(), e as usize), self.pi_power * e as i32)
    }
}

impl Mul for PiRational {
    type Output = PiRational;
    fn mul(self, rhs: Self) -> Self {
        PiRational::new(self.coeff * rhs.coeff, self.pi_power + rhs.pi_power)
    }
}

impl<'a> Mul<&'a PiRational> for &'a PiRational {
    type Output = PiRational;
    fn mul(self, rhs: &PiRational) -> PiRational {
        PiRational::new(&self.coeff * &rhs.coeff, self.pi_power + rhs.pi_power)
    }
}

impl Div for PiRational {
    type Output = PiRational;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Neg for PiRational {
    type Output = PiRational;
    fn neg(self) -> Self {
        PiRational::new(-self.coeff, self.pi_power)
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_power {
            0 => write!(f, "{}", format_rational(&self.coeff)),
            1 => write!(f, "({})*pi", format_rational(&self.coeff)),
            e => write!(f, "({})*pi^{}", format_rational(&self.coeff), e),
        }
    }
}

/// Modular inverse for coprime `a`, `m` (m >= 1).
pub fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let g = a.rem_euclid(m).extended_gcd(&m);
    (g.gcd == 1).then(|| g.x.rem_euclid(m))
}

pub fn is_perfect_square(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}
