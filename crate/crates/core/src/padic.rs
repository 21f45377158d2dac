//! Exact arithmetic substrate: rational valuations, prime profiles, residue
//! arithmetic modulo `p^N` and integer polynomials (notably `p`-power
//! cyclotomic polynomials).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of `p`-adic digits carried above the tower level.
pub const DEFAULT_EXTRA_PRECISION: u32 = 6;

/// Smallest admissible gap between coefficient precision and tower level.
pub const MIN_EXTRA_PRECISION: u32 = 3;

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Canonical `a/b` rendering (always with an explicit denominator).
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
    };
    match s.split_once('/') {
        Some((a, b)) => {
            let den = parse(b)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(parse(a)?, den))
        }
        None => Ok(BigRational::from_integer(parse(s)?)),
    }
}

/// An additive `p`-adic valuation normalized so that `v_p(p) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(BigRational),
    /// The element is exactly zero.
    Infinite,
    /// The element vanishes to working precision; its valuation is at least the bound.
    AtLeast(BigRational),
}

impl Valuation {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Valuation::Finite(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    /// Lower bound known for the valuation (`None` for exact zero).
    pub fn lower_bound(&self) -> Option<&BigRational> {
        match self {
            Valuation::Finite(q) | Valuation::AtLeast(q) => Some(q),
            Valuation::Infinite => None,
        }
    }

    /// Decides `self >= bound`. `None` when precision does not allow a verdict.
    pub fn at_least(&self, bound: &BigRational) -> Option<bool> {
        match self {
            Valuation::Finite(q) => Some(q >= bound),
            Valuation::Infinite => Some(true),
            Valuation::AtLeast(q) => {
                if q >= bound {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    /// Sum of valuations; the valuation of a product.
    pub fn add(&self, other: &Valuation) -> Valuation {
        use Valuation::*;
        match (self, other) {
            (Infinite, _) | (_, Infinite) => Infinite,
            (Finite(a), Finite(b)) => Finite(a + b),
            (Finite(a), AtLeast(b)) | (AtLeast(a), Finite(b)) | (AtLeast(a), AtLeast(b)) => {
                AtLeast(a + b)
            }
        }
    }

    pub fn shift(&self, by: &BigRational) -> Valuation {
        match self {
            Valuation::Finite(q) => Valuation::Finite(q + by),
            Valuation::AtLeast(q) => Valuation::AtLeast(q + by),
            Valuation::Infinite => Valuation::Infinite,
        }
    }

    /// Canonical string: `a/b`, `inf`, or `>=a/b`.
    pub fn render(&self) -> String {
        match self {
            Valuation::Finite(q) => format_rational(q),
            Valuation::Infinite => "inf".to_string(),
            Valuation::AtLeast(q) => format!(">={}", format_rational(q)),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Exact `p`-adic valuation of a rational number.
pub fn rational_valuation(x: &BigRational, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let pb = BigInt::from(p);
    let count = |v: &BigInt| -> i64 {
        let mut v = v.abs();
        let mut k = 0;
        while (&v % &pb).is_zero() {
            v /= &pb;
            k += 1;
        }
        k
    };
    Valuation::Finite(rat_int(count(x.numer()) - count(x.denom())))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_odd_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must be an odd prime"
        )));
    }
    Ok(())
}

/// Prime, residue degree, tower level and coefficient precision of a tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeProfile {
    pub p: u64,
    pub f: u32,
    pub n: u32,
    /// Coefficients are known modulo `p^precision`.
    pub precision: u32,
}

impl PrimeProfile {
    /// Profile with the default precision `n + 6`.
    pub fn new(p: u64, f: u32, n: u32) -> Result<Self> {
        Self::with_precision(p, f, n, n + DEFAULT_EXTRA_PRECISION)
    }

    pub fn with_precision(p: u64, f: u32, n: u32, precision: u32) -> Result<Self> {
        check_odd_prime(p)?;
        if f != 1 && f != 2 {
            return Err(Error::InvalidParameter(format!(
                "residue degree f = {f} unsupported (expected 1 or 2)"
            )));
        }
        if precision < n + MIN_EXTRA_PRECISION {
            return Err(Error::InvalidParameter(format!(
                "precision N = {precision} below n + {MIN_EXTRA_PRECISION} = {}",
                n + MIN_EXTRA_PRECISION
            )));
        }
        // p^N must fit comfortably in a u64 residue.
        let fits = (p as u128)
            .checked_pow(precision)
            .map(|m| m < (1u128 << 62))
            .unwrap_or(false);
        if !fits {
            return Err(Error::InvalidParameter(format!(
                "p^N = {p}^{precision} exceeds the 62-bit residue range"
            )));
        }
        if n > 12 {
            return Err(Error::InvalidParameter(format!(
                "tower level n = {n} too large"
            )));
        }
        Ok(PrimeProfile { p, f, n, precision })
    }

    /// Ramification index `p^n (p-1)` of the top layer over the base.
    pub fn ramification_index(&self) -> u64 {
        self.p.pow(self.n) * (self.p - 1)
    }

    /// Degree over `Q_p` of the top layer.
    pub fn absolute_degree(&self) -> u64 {
        self.ramification_index() * self.f as u64
    }
}

/// Arithmetic in `Z / p^N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Modulus {
    pub p: u64,
    pub exponent: u32,
    pub m: u64,
}

impl Modulus {
    pub fn new(p: u64, exponent: u32) -> Self {
        Modulus {
            p,
            exponent,
            m: p.pow(exponent),
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    pub fn reduce_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.m as i64) as u64
    }

    pub fn reduce_bigint(&self, a: &BigInt) -> u64 {
        let m = BigInt::from(self.m);
        a.mod_floor(&m).to_u64().expect("residue fits u64")
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.m;
        base %= self.m;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit, `None` if `a` is divisible by `p`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            return None;
        }
        let (g, x, _) = ext_gcd(a as i128, self.m as i128);
        debug_assert_eq!(g, 1);
        Some(x.rem_euclid(self.m as i128) as u64)
    }

    /// `v_p` of a residue; zero residues report the full exponent.
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.exponent;
        }
        let mut a = a;
        let mut k = 0;
        while a % self.p == 0 {
            a /= self.p;
            k += 1;
        }
        k
    }

    /// Teichmüller lift of `r mod p`.
    pub fn teichmuller(&self, r: u64) -> u64 {
        let r = r % self.p;
        if r == 0 {
            return 0;
        }
        self.pow(r, self.p.pow(self.exponent.saturating_sub(1)))
    }

    /// Symmetric representative in `(-m/2, m/2]`.
    pub fn signed(&self, a: u64) -> i64 {
        if a > self.m / 2 {
            a as i64 - self.m as i64
        } else {
            a as i64
        }
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Smallest positive quadratic non-residue modulo `p`.
pub fn smallest_nonresidue(p: u64) -> u64 {
    let md = Modulus::new(p, 1);
    (2..p)
        .find(|&c| md.pow(c, (p - 1) / 2) == p - 1)
        .expect("odd prime has a non-residue")
}

/// Smallest primitive root modulo `p^k` (`p` odd).
pub fn primitive_root_mod_prime_power(p: u64, k: u32) -> u64 {
    let md = Modulus::new(p, k);
    let order = md.m / p * (p - 1);
    let mut factors = vec![];
    let mut t = p - 1;
    let mut d = 2;
    while d * d <= t {
        if t % d == 0 {
            factors.push(d);
            while t % d == 0 {
                t /= d;
            }
        }
        d += 1;
    }
    if t > 1 {
        factors.push(t);
    }
    if k > 1 {
        factors.push(p);
    }
    (2..md.m)
        .find(|&g| g % p != 0 && factors.iter().all(|&q| md.pow(g, order / q) != 1))
        .expect("cyclic group has a generator")
}

/// Dense integer polynomial, coefficients from the constant term upward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    pub coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn nonzero_terms(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// `P(X^k)`.
    pub fn substitute_power(&self, k: usize) -> IntPoly {
        let mut out = vec![BigInt::zero(); self.degree() * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * k] = c.clone();
        }
        IntPoly::new(out)
    }

    /// `P(X + 1)`.
    pub fn shift_by_one(&self) -> IntPoly {
        let mut a = self.coeffs.clone();
        let d = a.len();
        for i in 0..d {
            for j in (i..d - 1).rev() {
                let t = a[j + 1].clone();
                a[j] += t;
            }
        }
        IntPoly::new(a)
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let mut out = vec![BigInt::zero(); self.degree() + other.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    /// Eisenstein criterion at `p`.
    pub fn is_eisenstein(&self, p: u64) -> bool {
        let pb = BigInt::from(p);
        let d = self.degree();
        if d == 0 || (&self.coeffs[d] % &pb).is_zero() {
            return false;
        }
        self.coeffs[..d].iter().all(|c| (c % &pb).is_zero())
            && !(&self.coeffs[0] % (&pb * &pb)).is_zero()
    }
}

/// The `p^k`-th cyclotomic polynomial `sum_{i<p} X^{i p^{k-1}}`.
pub fn cyclotomic_poly(p: u64, k: u32) -> Result<IntPoly> {
    check_odd_prime(p)?;
    if k == 0 {
        return Err(Error::InvalidParameter(
            "cyclotomic index exponent k must be positive".into(),
        ));
    }
    let step = p.pow(k - 1) as usize;
    let mut coeffs = vec![BigInt::zero(); step * (p as usize - 1) + 1];
    for i in 0..p as usize {
        coeffs[i * step] = BigInt::one();
    }
    Ok(IntPoly::new(coeffs))
}
