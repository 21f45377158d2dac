//! Closed-form valuations: cyclotomic values, the `ω_n^±` polynomials, the
//! valuation of `δ_χ`, the L-value formula with Iwasawa invariants `λ, μ`, and
//! the root-number parity rule. Every formula works in exact rationals.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{check_odd_prime, cyclotomic_poly, rat, rat_int, IntPoly, Valuation};
use crate::tower::{RingElement, TowerRing};

/// `+` or `-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_int(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::InvalidParameter(format!(
                "sign must be +1 or -1, got {s}"
            ))),
        }
    }

    /// `(-1)^k`.
    pub fn of_power(k: i64) -> Self {
        if k.rem_euclid(2) == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Parameters of the L-value formula. `lambda_inv` and `mu_inv` are the Iwasawa
/// invariants, `epsilon` the root number `W(φ)`, asserted by the caller.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaInput {
    pub p: u64,
    pub n: u32,
    pub epsilon: Sign,
    pub lambda_inv: u64,
    pub mu_inv: u64,
    /// Smallest level from which the invariants control the valuation. The
    /// threshold is not effective, so it is supplied by the caller.
    pub n0: u32,
}

impl FormulaInput {
    /// Input with `λ = μ = 0`, `n0 = 1` and the sign forced to `(-1)^{n-1}`.
    pub fn new(p: u64, n: u32) -> Self {
        FormulaInput {
            p,
            n,
            epsilon: Sign::of_power(n as i64 - 1),
            lambda_inv: 0,
            mu_inv: 0,
            n0: 1,
        }
    }
}

/// A factor of `ω_n^±`: either `γ - 1` or `Φ_{p^k}(γ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OmegaFactor {
    GammaMinusOne,
    Cyclotomic(u32),
}

impl fmt::Display for OmegaFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaFactor::GammaMinusOne => f.write_str("(g-1)"),
            OmegaFactor::Cyclotomic(k) => write!(f, "Phi_p^{k}(g)"),
        }
    }
}

/// `ω_n^+ = ∏_{k even} Φ_{p^k}(γ)` and `ω_n^- = (γ-1) ∏_{k odd} Φ_{p^k}(γ)`, `1 ≤ k ≤ n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaPolynomial {
    pub sign: Sign,
    pub n: u32,
    pub factors: Vec<OmegaFactor>,
}

impl OmegaPolynomial {
    pub fn new(sign: Sign, n: u32) -> Self {
        let mut factors = Vec::new();
        if sign == Sign::Minus {
            factors.push(OmegaFactor::GammaMinusOne);
        }
        let parity = if sign == Sign::Plus { 0 } else { 1 };
        factors.extend(
            (1..=n)
                .filter(|k| k % 2 == parity)
                .map(OmegaFactor::Cyclotomic),
        );
        OmegaPolynomial { sign, n, factors }
    }

    /// The product as an integer polynomial in `γ`.
    pub fn expand(&self, p: u64) -> Result<IntPoly> {
        self.factors.iter().try_fold(IntPoly::one(), |acc, f| {
            let g = match f {
                OmegaFactor::GammaMinusOne => IntPoly::from_i64(&[-1, 1]),
                OmegaFactor::Cyclotomic(k) => cyclotomic_poly(p, *k)?,
            };
            Ok(acc.mul(&g))
        })
    }

    pub fn describe(&self) -> String {
        if self.factors.is_empty() {
            return "1".into();
        }
        self.factors
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("*")
    }
}

fn p_power(p: u64, k: u32) -> BigInt {
    BigInt::from(p).pow(k)
}

/// `1 / (p^{m-1}(p-1))`, the valuation of `ζ_{p^m} - 1`.
fn zeta_minus_one_valuation(p: u64, m: u32) -> BigRational {
    BigRational::new(BigInt::one(), p_power(p, m - 1) * BigInt::from(p - 1))
}

/// `(p^k - p^{k-1}) / (p^{n-1}(p-1))` without the tower cross-check.
pub fn cyclotomic_value_closed_form(p: u64, k: u32, n: u32) -> Result<BigRational> {
    check_odd_prime(p)?;
    if k < 1 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "closed form needs 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    Ok(BigRational::new(
        p_power(p, k) - p_power(p, k - 1),
        p_power(p, n - 1) * BigInt::from(p - 1),
    ))
}

/// `Φ_{p^k}(ζ_{p^m}) = Σ_{i<p} ζ_{p^m}^{i p^{k-1}}` computed in a tower ring
/// containing `ζ_{p^m}`.
pub fn cyclotomic_value_in_tower(ring: &TowerRing, k: u32, m: u32) -> Result<RingElement> {
    if k < 1 || m < 1 || m > ring.n() + 1 {
        return Err(Error::InvalidParameter(format!(
            "need k >= 1 and 1 <= m <= {}",
            ring.n() + 1
        )));
    }
    let p = ring.p();
    let step = p.pow(ring.n() + 1 - m) as i64;
    let stride = p.pow(k - 1) as i64 % ring.zeta_order() as i64;
    Ok((0..p as i64).fold(ring.zero(), |acc, i| {
        ring.add(&acc, &ring.zeta_power(i * stride * step))
    }))
}

/// `v_p(Φ_{p^k}(ζ_{p^n}))` for `1 ≤ k < n`, checked against a direct tower computation.
pub fn cyclotomic_value_valuation(p: u64, k: u32, n: u32) -> Result<Valuation> {
    let closed = cyclotomic_value_closed_form(p, k, n)?;
    let ring = TowerRing::from_params(p, 1, n - 1)?;
    let direct = ring.valuation_of(&cyclotomic_value_in_tower(&ring, k, n)?);
    if direct != Valuation::Finite(closed.clone()) {
        return Err(Error::violation(
            "v_p(Phi_{p^k}(zeta_{p^n})) = (p^k - p^(k-1)) / (p^(n-1)(p-1))",
            format!("p = {p}, k = {k}, n = {n}: tower gives {direct}"),
        ));
    }
    Ok(Valuation::Finite(closed))
}

/// `v_p(Φ_{p^k}(ζ_{p^m}))` for any `k, m ≥ 1`.
fn cyclotomic_factor_valuation(p: u64, k: u32, m: u32) -> Valuation {
    match k.cmp(&m) {
        std::cmp::Ordering::Less => {
            Valuation::Finite(BigRational::new(BigInt::one(), p_power(p, m - k)))
        }
        std::cmp::Ordering::Equal => Valuation::Infinite,
        // ζ_{p^m}^{p^{k-1}} = 1, so the value is p
        std::cmp::Ordering::Greater => Valuation::Finite(BigRational::one()),
    }
}

/// `v_p(ω_n^{sign}(ζ_{p^m}))` for `1 ≤ m ≤ n`; `Infinite` when a factor vanishes.
pub fn omega_valuation_at_order(sign: Sign, p: u64, n: u32, m: u32) -> Result<Valuation> {
    check_odd_prime(p)?;
    if m < 1 || m > n {
        return Err(Error::InvalidParameter(format!(
            "order exponent must satisfy 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    let omega = OmegaPolynomial::new(sign, n);
    Ok(omega
        .factors
        .iter()
        .fold(Valuation::Finite(BigRational::zero()), |acc, f| {
            let v = match f {
                OmegaFactor::GammaMinusOne => Valuation::Finite(zeta_minus_one_valuation(p, m)),
                OmegaFactor::Cyclotomic(k) => cyclotomic_factor_valuation(p, *k, m),
            };
            acc.add(&v)
        }))
}

/// The same valuation obtained by multiplying the factor values inside a tower ring.
pub fn omega_valuation_in_tower(sign: Sign, p: u64, n: u32, m: u32) -> Result<Valuation> {
    if m < 1 || m > n {
        return Err(Error::InvalidParameter("need 1 <= m <= n".into()));
    }
    let ring = TowerRing::from_params(p, 1, m - 1)?;
    let omega = OmegaPolynomial::new(sign, n);
    let mut value = ring.one();
    for f in &omega.factors {
        let factor = match f {
            OmegaFactor::GammaMinusOne => ring.sub(&ring.root_of_unity(m)?, &ring.one()),
            OmegaFactor::Cyclotomic(k) => cyclotomic_value_in_tower(&ring, *k, m)?,
        };
        value = ring.mul(&value, &factor);
    }
    Ok(match ring.valuation_of(&value) {
        Valuation::AtLeast(_) => Valuation::Infinite,
        v => v,
    })
}

/// `-(n+1)/2 + (1/(p^{n-1}(p-1))) ((1-ε)/2 + Σ_{1≤k<n, (-1)^k=ε} (p^k - p^{k-1}))`
/// with `ε = (-1)^{n-1}`: the valuation of `δ_χ(v_ε)` for `χ` of order `p^n`.
pub fn delta_valuation_rhs(p: u64, n: u32) -> Result<Valuation> {
    check_odd_prime(p)?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "the character must have order p^n > 1".into(),
        ));
    }
    let eps = Sign::of_power(n as i64 - 1);
    let mut numer = BigInt::from((1 - eps.as_int()) / 2);
    for k in 1..n {
        if Sign::of_power(k as i64) == eps {
            numer += p_power(p, k) - p_power(p, k - 1);
        }
    }
    let scale = BigRational::new(numer, p_power(p, n - 1) * BigInt::from(p - 1));
    Ok(Valuation::Finite(scale - rat(n as i64 + 1, 2)))
}

/// `v_p(L(φχ,1)/Ω) = λ/(p^{n-1}(p-1)) + μ + v_p(δ_χ(v_ε))`.
pub fn lvalue_valuation_rhs(input: &FormulaInput) -> Result<Valuation> {
    let FormulaInput {
        p,
        n,
        epsilon,
        lambda_inv,
        mu_inv,
        n0,
    } = *input;
    if n == 0 {
        return Err(Error::InvalidParameter("level must be >= 1".into()));
    }
    if n < n0 {
        return Err(Error::Precondition(format!(
            "level {n} lies below the threshold n0 = {n0} where the invariants apply"
        )));
    }
    if epsilon != Sign::of_power(n as i64 - 1) {
        return Err(Error::Precondition(format!(
            "W = {epsilon}1 with n = {n} satisfies (-1)^n = W, so L(phi chi, 1) = 0 and the valuation is infinite"
        )));
    }
    let lam = BigRational::new(
        BigInt::from(lambda_inv),
        p_power(p, n - 1) * BigInt::from(p - 1),
    );
    Ok(delta_valuation_rhs(p, n)?.shift(&(lam + rat_int(mu_inv as i64))))
}

/// `-3/2 + 1/(p-1)`, the lower bound at level 2.
pub fn corollary_bound(p: u64) -> Result<Valuation> {
    check_odd_prime(p)?;
    if p < 5 {
        return Err(Error::InvalidParameter(
            "the bound is stated for p >= 5".into(),
        ));
    }
    Ok(Valuation::Finite(rat(-3, 2) + rat(1, p as i64 - 1)))
}

/// `W(φχ) = W(φ)(-1)^{n-1}`; the flag is set when the central value is forced to vanish.
pub fn root_number_parity(w: Sign, n: u32) -> Result<(Sign, bool)> {
    if n == 0 {
        return Err(Error::InvalidParameter("level must be >= 1".into()));
    }
    let out = if Sign::of_power(n as i64 - 1) == Sign::Plus {
        w
    } else {
        w.flip()
    };
    Ok((out, out == Sign::Minus))
}

/// Named boolean identity checks attached to a formula evaluation.
pub type IdentityChecks = BTreeMap<String, bool>;

/// `delta_valuation_rhs(p, n) + (n+1)/2 = v_p(ω_n^ε(ζ_{p^n}))`.
pub fn delta_omega_identity(p: u64, n: u32) -> Result<bool> {
    let eps = Sign::of_power(n as i64 - 1);
    let lhs = delta_valuation_rhs(p, n)?.shift(&rat(n as i64 + 1, 2));
    Ok(lhs == omega_valuation_at_order(eps, p, n, n)?)
}

/// Identity checks for the `formula eval` front end.
pub fn identity_checks(which: &str, input: &FormulaInput) -> Result<IdentityChecks> {
    let mut out = IdentityChecks::new();
    let FormulaInput { p, n, .. } = *input;
    match which {
        "delta" => {
            out.insert("omega_relation".into(), delta_omega_identity(p, n)?);
        }
        "lvalue" => {
            let full = lvalue_valuation_rhs(input)?;
            let lam = BigRational::new(
                BigInt::from(input.lambda_inv),
                p_power(p, n - 1) * BigInt::from(p - 1),
            ) + rat_int(input.mu_inv as i64);
            out.insert(
                "invariants_plus_delta".into(),
                full == delta_valuation_rhs(p, n)?.shift(&lam),
            );
            out.insert("omega_relation".into(), delta_omega_identity(p, n)?);
        }
        "bound" => {
            out.insert(
                "equals_level_two_value".into(),
                corollary_bound(p)? == lvalue_valuation_rhs(&FormulaInput::new(p, 2))?,
            );
        }
        "parity" => {
            let (s, _) = root_number_parity(input.epsilon, n)?;
            let (t, _) = root_number_parity(input.epsilon, n + 1)?;
            out.insert("parity_flip".into(), s == t.flip());
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown formula '{other}'"
            )));
        }
    }
    Ok(out)
}

/// `(n, v_p)` for `λ = μ = 0` and `n = 1..=max_n`.
pub fn valuation_growth(p: u64, max_n: u32) -> Result<Vec<(u32, Valuation)>> {
    (1..=max_n)
        .map(|n| Ok((n, lvalue_valuation_rhs(&FormulaInput::new(p, n))?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_examples() {
        assert_eq!(
            cyclotomic_value_valuation(5, 1, 2).unwrap(),
            Valuation::Finite(rat(1, 5))
        );
        assert_eq!(
            cyclotomic_value_valuation(3, 2, 3).unwrap(),
            Valuation::Finite(rat(1, 3))
        );
        assert!(cyclotomic_value_valuation(5, 2, 2).is_err());
    }

    #[test]
    fn omega_examples() {
        assert_eq!(
            omega_valuation_at_order(Sign::Minus, 5, 1, 1).unwrap(),
            Valuation::Infinite
        );
        assert_eq!(
            omega_valuation_at_order(Sign::Plus, 5, 1, 1).unwrap(),
            Valuation::Finite(rat_int(0))
        );
        assert_eq!(
            omega_valuation_at_order(Sign::Plus, 5, 2, 2).unwrap(),
            Valuation::Infinite
        );
        assert_eq!(
            omega_valuation_at_order(Sign::Minus, 5, 2, 2).unwrap(),
            Valuation::Finite(rat(1, 4))
        );
        assert_eq!(OmegaPolynomial::new(Sign::Plus, 1).describe(), "1");
        assert_eq!(OmegaPolynomial::new(Sign::Minus, 3).factors.len(), 3);
    }

    #[test]
    fn omega_expansion_degree() {
        // ω_3^- = (γ-1) Φ_p(γ) Φ_{p^3}(γ): degree 1 + (p-1) + p^2(p-1)
        let w = OmegaPolynomial::new(Sign::Minus, 3).expand(3).unwrap();
        assert_eq!(w.degree(), 1 + 2 + 18);
        assert!(w.is_monic());
    }

    #[test]
    fn delta_and_lvalue_examples() {
        assert_eq!(
            delta_valuation_rhs(5, 1).unwrap(),
            Valuation::Finite(rat_int(-1))
        );
        assert_eq!(
            delta_valuation_rhs(5, 2).unwrap(),
            Valuation::Finite(rat(-5, 4))
        );
        assert!(delta_valuation_rhs(5, 0).is_err());
        assert_eq!(
            lvalue_valuation_rhs(&FormulaInput::new(5, 3)).unwrap(),
            Valuation::Finite(rat(-9, 5))
        );
        let mut bad = FormulaInput::new(5, 2);
        bad.epsilon = Sign::Plus;
        assert!(lvalue_valuation_rhs(&bad).is_err());
        let mut low = FormulaInput::new(5, 2);
        low.n0 = 3;
        assert!(lvalue_valuation_rhs(&low).is_err());
        let mut inv = FormulaInput::new(5, 2);
        inv.lambda_inv = 2;
        inv.mu_inv = 1;
        assert_eq!(
            lvalue_valuation_rhs(&inv).unwrap(),
            Valuation::Finite(rat(-5, 4) + rat(2, 20) + rat_int(1))
        );
    }

    #[test]
    fn bound_and_parity() {
        assert_eq!(corollary_bound(5).unwrap(), Valuation::Finite(rat(-5, 4)));
        assert_eq!(corollary_bound(7).unwrap(), Valuation::Finite(rat(-4, 3)));
        assert!(corollary_bound(3).is_err());
        assert_eq!(
            root_number_parity(Sign::Minus, 2).unwrap(),
            (Sign::Plus, false)
        );
        assert_eq!(
            root_number_parity(Sign::Plus, 2).unwrap(),
            (Sign::Minus, true)
        );
        assert_eq!(
            root_number_parity(Sign::Minus, 1).unwrap(),
            (Sign::Minus, true)
        );
    }

    #[test]
    fn identity_checks_hold() {
        for which in ["delta", "lvalue", "bound", "parity"] {
            let checks = identity_checks(which, &FormulaInput::new(5, 2)).unwrap();
            assert!(checks.values().all(|&b| b), "{which}: {checks:?}");
        }
        assert!(identity_checks("nope", &FormulaInput::new(5, 2)).is_err());
    }
}
