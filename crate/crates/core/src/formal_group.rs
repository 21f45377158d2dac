//! Truncated power series over `Q`, the Honda logarithm
//! `λ(t) = Σ_i (-1)^i t^{p^{2i}} / p^i`, its compositional inverse, the formal
//! group law `F(X, Y) = λ^{-1}(λ(X) + λ(Y))`, evaluation at tower elements, and
//! the Coates–Wiles logarithmic derivative for the multiplicative group.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{rat, rat_int, rational_valuation, Valuation};
use crate::resolvent::{resolvent_gamma, GaloisCharacter};
use crate::tower::{BaseElement, GaloisElement, RingElement, ScaledElement, TowerRing};

const LAMBDA_STATEMENT: &str =
    "<lambda(a)|chi> - <a|chi> lies in p<a|chi> O and both have valuation (n+1)/2";

/// What is known about the coefficients beyond the truncation degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeriesTail {
    /// The series is a polynomial: no omitted terms.
    Exact,
    /// Omitted terms are `(-1)^i t^{p^{2i}} / p^i` for `i ≥ first_omitted`.
    Honda { p: u64, first_omitted: u32 },
    /// Nothing is known beyond the truncation degree.
    Unbounded,
}

/// A power series `Σ_{j ≤ D} a_j t^j` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    pub coeffs: Vec<BigRational>,
    pub tail: SeriesTail,
}

impl TruncatedSeries {
    pub fn new(mut coeffs: Vec<BigRational>, tail: SeriesTail) -> Self {
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        TruncatedSeries { coeffs, tail }
    }

    /// The identity series `t` truncated at degree `d`.
    pub fn identity(d: usize) -> Self {
        let mut c = vec![BigRational::zero(); d + 1];
        if d >= 1 {
            c[1] = BigRational::one();
        }
        TruncatedSeries::new(c, SeriesTail::Exact)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, j: usize) -> BigRational {
        self.coeffs
            .get(j)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Indices of nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len())
            .filter(|&j| !self.coeffs[j].is_zero())
            .collect()
    }

    pub fn derivative(&self) -> TruncatedSeries {
        let c = (1..self.coeffs.len())
            .map(|j| &self.coeffs[j] * BigRational::from_integer(BigInt::from(j)))
            .collect();
        TruncatedSeries::new(c, SeriesTail::Unbounded)
    }

    /// Lower bound for `v_p` of the omitted tail evaluated at an argument of
    /// valuation `≥ v0 > 0`; `None` if no bound is available.
    pub fn tail_valuation_bound(&self, v0: &BigRational) -> Option<Valuation> {
        match &self.tail {
            SeriesTail::Exact => Some(Valuation::Infinite),
            SeriesTail::Unbounded => None,
            SeriesTail::Honda { p, first_omitted } => {
                let i = *first_omitted;
                let deg = BigInt::from(*p).pow(2 * i);
                // successive terms grow in valuation once p^{2i}(p^2-1) v0 ≥ 1
                let growth = BigRational::from_integer(&deg * BigInt::from(p * p - 1)) * v0;
                if growth < BigRational::one() {
                    return None;
                }
                Some(Valuation::Finite(
                    BigRational::from_integer(deg) * v0 - rat_int(i as i64),
                ))
            }
        }
    }

    fn mul_trunc(a: &[BigRational], b: &[BigRational], d: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); d + 1];
        for (i, x) in a.iter().enumerate().take(d + 1) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(d + 1 - i) {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        out
    }

    /// `self ∘ g` truncated at degree `min(D_self, D_g)`; `g` must have zero constant term.
    pub fn compose(&self, g: &TruncatedSeries) -> Result<TruncatedSeries> {
        if !g.coeff(0).is_zero() {
            return Err(Error::InvalidParameter(
                "inner series must have zero constant term".into(),
            ));
        }
        let d = self.degree().min(g.degree());
        let mut out = vec![BigRational::zero(); d + 1];
        let mut power = vec![BigRational::zero(); d + 1];
        power[0] = BigRational::one();
        for j in 0..=d {
            let c = self.coeff(j);
            if !c.is_zero() {
                for (o, pw) in out.iter_mut().zip(&power) {
                    *o += &c * pw;
                }
            }
            power = Self::mul_trunc(&power, &g.coeffs, d);
        }
        Ok(TruncatedSeries::new(out, SeriesTail::Unbounded))
    }

    /// Largest `p`-power in a coefficient denominator.
    pub fn max_denominator_exponent(&self, p: u64) -> u32 {
        self.coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| match rational_valuation(c, p) {
                Valuation::Finite(v) if v < BigRational::zero() => {
                    (-v).to_integer().to_u32().unwrap_or(u32::MAX)
                }
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }
}

/// `λ(t) = Σ_{p^{2i} ≤ D} (-1)^i t^{p^{2i}} / p^i`.
pub fn honda_log(p: u64, d: usize) -> Result<TruncatedSeries> {
    if d < 1 {
        return Err(Error::InvalidParameter(
            "truncation degree must be >= 1".into(),
        ));
    }
    let mut coeffs = vec![BigRational::zero(); d + 1];
    let mut i = 0u32;
    loop {
        let deg = (p as u128).pow(2 * i);
        if deg > d as u128 {
            break;
        }
        let sign = if i % 2 == 0 { 1 } else { -1 };
        coeffs[deg as usize] = BigRational::new(BigInt::from(sign), BigInt::from(p).pow(i));
        i += 1;
    }
    Ok(TruncatedSeries::new(
        coeffs,
        SeriesTail::Honda {
            p,
            first_omitted: i,
        },
    ))
}

/// Compositional inverse `g` with `s(g(t)) ≡ t mod t^{D+1}`.
pub fn series_inverse(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    if !s.coeff(0).is_zero() {
        return Err(Error::InvalidParameter("series has a constant term".into()));
    }
    if !s.coeff(1).is_one() {
        return Err(Error::NotInvertible(
            "linear coefficient must be 1 for reversion".into(),
        ));
    }
    let d = s.degree();
    let mut g = vec![BigRational::zero(); d + 1];
    if d >= 1 {
        g[1] = BigRational::one();
    }
    // Fix g_k so that the t^k coefficient of s(g) vanishes, for k = 2..D.
    for k in 2..=d {
        let partial = TruncatedSeries::new(g[..k].to_vec(), SeriesTail::Unbounded);
        let trunc = TruncatedSeries::new(s.coeffs[..=k].to_vec(), SeriesTail::Unbounded);
        let mut padded = partial.coeffs.clone();
        padded.resize(k + 1, BigRational::zero());
        let comp = trunc.compose(&TruncatedSeries::new(padded, SeriesTail::Unbounded))?;
        g[k] = -comp.coeff(k);
    }
    Ok(TruncatedSeries::new(g, SeriesTail::Unbounded))
}

/// A sparse multivariate series truncated at total degree `max_degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSeries {
    pub nvars: usize,
    pub max_degree: u32,
    pub terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MultiSeries {
    pub fn zero(nvars: usize, max_degree: u32) -> Self {
        MultiSeries {
            nvars,
            max_degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, max_degree: u32, c: BigRational) -> Self {
        let mut s = Self::zero(nvars, max_degree);
        if !c.is_zero() {
            s.terms.insert(vec![0; nvars], c);
        }
        s
    }

    pub fn variable(nvars: usize, max_degree: u32, i: usize) -> Self {
        let mut s = Self::zero(nvars, max_degree);
        let mut e = vec![0; nvars];
        e[i] = 1;
        if max_degree >= 1 {
            s.terms.insert(e, BigRational::one());
        }
        s
    }

    fn insert_add(&mut self, e: Vec<u32>, c: BigRational) {
        if e.iter().sum::<u32>() > self.max_degree || c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(e.clone())
            .or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &MultiSeries) -> MultiSeries {
        let mut out = self.clone();
        out.max_degree = self.max_degree.min(other.max_degree);
        out.terms
            .retain(|e, _| e.iter().sum::<u32>() <= out.max_degree);
        for (e, c) in &other.terms {
            out.insert_add(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiSeries) -> MultiSeries {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> MultiSeries {
        let mut out = Self::zero(self.nvars, self.max_degree);
        for (e, v) in &self.terms {
            out.insert_add(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &MultiSeries) -> MultiSeries {
        let d = self.max_degree.min(other.max_degree);
        let mut out = Self::zero(self.nvars, d);
        for (ea, ca) in &self.terms {
            let da: u32 = ea.iter().sum();
            for (eb, cb) in &other.terms {
                if da + eb.iter().sum::<u32>() > d {
                    continue;
                }
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert_add(e, ca * cb);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    pub fn coeff(&self, e: &[u32]) -> BigRational {
        self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `f(x)` for univariate `f` and `x` without constant term.
    pub fn compose_univariate(f: &TruncatedSeries, x: &MultiSeries) -> Result<MultiSeries> {
        if !x.coeff(&vec![0; x.nvars]).is_zero() {
            return Err(Error::InvalidParameter(
                "argument must have zero constant term".into(),
            ));
        }
        let d = x.max_degree.min(f.degree() as u32);
        let mut out = Self::zero(x.nvars, d);
        let mut power = Self::constant(x.nvars, d, BigRational::one());
        for j in 0..=d as usize {
            let c = f.coeff(j);
            if !c.is_zero() {
                out = out.add(&power.scale(&c));
            }
            if j < d as usize {
                power = power.mul(x);
            }
        }
        Ok(out)
    }

    /// `F(a_1, …, a_k)` for a `k`-variate `F` and arguments without constant term.
    pub fn compose(&self, args: &[MultiSeries]) -> Result<MultiSeries> {
        if args.len() != self.nvars {
            return Err(Error::InvalidParameter("argument count mismatch".into()));
        }
        let nv = args[0].nvars;
        let d = args
            .iter()
            .map(|a| a.max_degree)
            .min()
            .unwrap_or(0)
            .min(self.max_degree);
        let mut powers: Vec<Vec<MultiSeries>> = args
            .iter()
            .map(|_| vec![MultiSeries::constant(nv, d, BigRational::one())])
            .collect();
        let mut out = MultiSeries::zero(nv, d);
        for (e, c) in &self.terms {
            let mut term = MultiSeries::constant(nv, d, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().expect("nonempty").mul(&args[i]);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][k as usize]);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// All coefficients are `p`-integral.
    pub fn is_p_integral(&self, p: u64) -> bool {
        let pb = BigInt::from(p);
        self.terms.values().all(|c| !(c.denom() % &pb).is_zero())
    }
}

/// `F(X, Y) = λ^{-1}(λ(X) + λ(Y))` to total degree `d`.
pub fn formal_group_law(p: u64, d: usize) -> Result<MultiSeries> {
    let lambda = honda_log(p, d)?;
    let inv = series_inverse(&lambda)?;
    let x = MultiSeries::variable(2, d as u32, 0);
    let y = MultiSeries::variable(2, d as u32, 1);
    let sum = MultiSeries::compose_univariate(&lambda, &x)?
        .add(&MultiSeries::compose_univariate(&lambda, &y)?);
    MultiSeries::compose_univariate(&inv, &sum)
}

/// `F(X, Y)` is `p`-integral up to total degree `d`.
pub fn group_law_integrality_check(p: u64, d: usize) -> Result<bool> {
    Ok(formal_group_law(p, d)?.is_p_integral(p))
}

/// `F(F(X, Y), Z) = F(X, F(Y, Z))` up to total degree `d`.
pub fn group_law_associativity_check(p: u64, d: usize) -> Result<bool> {
    let f = formal_group_law(p, d)?;
    let x = MultiSeries::variable(3, d as u32, 0);
    let y = MultiSeries::variable(3, d as u32, 1);
    let z = MultiSeries::variable(3, d as u32, 2);
    let fxy = f.compose(&[x.clone(), y.clone()])?;
    let fyz = f.compose(&[y, z.clone()])?;
    let left = f.compose(&[fxy, z])?;
    let right = f.compose(&[x, fyz])?;
    Ok(left.sub(&right).is_zero())
}

/// `λ(λ^{-1}(t)) = t` and `λ^{-1}(λ(t)) = t` to the truncation degree.
pub fn log_inverse_roundtrip_check(p: u64, d: usize) -> Result<bool> {
    let lambda = honda_log(p, d)?;
    let inv = series_inverse(&lambda)?;
    let id = TruncatedSeries::identity(d);
    Ok(lambda.compose(&inv)?.coeffs == id.coeffs && inv.compose(&lambda)?.coeffs == id.coeffs)
}

/// A series value in the tower together with the precision to which it is certified.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: ScaledElement,
    /// `v_p` of the uncertainty: the true value differs by an element of at least this valuation.
    pub certified: BigRational,
}

fn p_exponent_of(c: &BigRational, p: u64) -> (i64, BigRational) {
    match rational_valuation(c, p) {
        Valuation::Finite(v) => {
            let k = v.to_integer().to_i64().expect("small exponent");
            (k, c.clone())
        }
        _ => (0, c.clone()),
    }
}

/// Reduces a rational with `p`-free denominator modulo `p^N`.
fn reduce_unit_rational(ring: &TowerRing, c: &BigRational) -> Result<u64> {
    let md = ring.modulus();
    let num = md.reduce_bigint(c.numer());
    let den = md.reduce_bigint(c.denom());
    let inv = md
        .inv(den)
        .ok_or_else(|| Error::Internal("denominator divisible by p".into()))?;
    Ok(md.mul(num, inv))
}

/// Evaluates `Σ c_j x^j` (a polynomial with rational coefficients) in the tower
/// as `p^{-k} · (integral element)`.
fn evaluate_polynomial(
    ring: &TowerRing,
    coeffs: &[(usize, BigRational)],
    x: &RingElement,
) -> Result<ScaledElement> {
    let p = ring.p();
    let k = coeffs
        .iter()
        .map(|(_, c)| -p_exponent_of(c, p).0)
        .max()
        .unwrap_or(0)
        .max(0) as u32;
    let pk = BigRational::from_integer(BigInt::from(p).pow(k));
    let mut acc = ring.zero().with_precision(x.precision);
    let mut cache: BTreeMap<usize, RingElement> = BTreeMap::new();
    for (j, c) in coeffs {
        let scaled = c * &pk;
        if scaled.is_zero() {
            continue;
        }
        let power = cache
            .entry(*j)
            .or_insert_with(|| ring.pow(x, *j as u64))
            .clone();
        let s = reduce_unit_rational(ring, &scaled)?;
        acc = ring.add(&acc, &ring.scale_int(&power, s as i64));
    }
    Ok(ring.normalize_scaled(&ScaledElement {
        element: acc,
        p_exponent: k,
    }))
}

/// `λ(α)` for `v_p(α) > 0`, certified up to the tail bound of the truncation
/// (and the precision lost to denominators). Fails when the tail bound is below
/// `required`.
pub fn evaluate_log_to(
    ring: &TowerRing,
    lambda: &TruncatedSeries,
    alpha: &RingElement,
    required: &BigRational,
) -> Result<SeriesValue> {
    let v = match ring.valuation_of(alpha) {
        Valuation::Finite(v) => v,
        Valuation::AtLeast(_) | Valuation::Infinite => {
            return Ok(SeriesValue {
                value: ScaledElement {
                    element: ring.zero().with_precision(alpha.precision),
                    p_exponent: 0,
                },
                certified: rat_int(alpha.precision as i64),
            })
        }
    };
    if v <= BigRational::zero() {
        return Err(Error::Precondition(
            "λ needs an argument of positive valuation".into(),
        ));
    }
    let tail = lambda
        .tail_valuation_bound(&v)
        .ok_or_else(|| Error::TruncationTooShort("no tail bound for this argument".into()))?;
    if tail.at_least(required) != Some(true) {
        return Err(Error::TruncationTooShort(format!(
            "tail bound {tail} below the required {}; increase the truncation degree",
            crate::padic::format_rational(required)
        )));
    }
    let terms: Vec<(usize, BigRational)> = lambda
        .support()
        .into_iter()
        .map(|j| (j, lambda.coeff(j)))
        .collect();
    let value = evaluate_polynomial(ring, &terms, alpha)?;
    let known = rat_int(value.element.precision as i64 - value.p_exponent as i64);
    let certified = match tail.finite() {
        Some(t) => t.clone().min(known),
        None => known,
    };
    Ok(SeriesValue { value, certified })
}

/// `λ(α)` certified to at least the ring's working precision.
pub fn evaluate_log(
    ring: &TowerRing,
    lambda: &TruncatedSeries,
    alpha: &RingElement,
) -> Result<SeriesValue> {
    evaluate_log_to(ring, lambda, alpha, &rat_int(ring.precision() as i64))
}

/// `F(a, b)` for a truncated group law; certified to `(D+1) · min(v(a), v(b))`
/// because omitted terms have total degree `> D` and integral coefficients.
pub fn evaluate_group_law(
    ring: &TowerRing,
    law: &MultiSeries,
    a: &RingElement,
    b: &RingElement,
) -> Result<SeriesValue> {
    let va = ring.valuation_of(a);
    let vb = ring.valuation_of(b);
    let vmin = match (va.finite(), vb.finite()) {
        (Some(x), Some(y)) => x.min(y).clone(),
        _ => return Err(Error::Precondition("arguments must be nonzero".into())),
    };
    if vmin <= BigRational::zero() {
        return Err(Error::Precondition(
            "arguments must lie in the maximal ideal".into(),
        ));
    }
    let p = ring.p();
    let k = law
        .terms
        .values()
        .map(|c| -p_exponent_of(c, p).0)
        .max()
        .unwrap_or(0)
        .max(0) as u32;
    let pk = BigRational::from_integer(BigInt::from(p).pow(k));
    let max_deg = law.terms.keys().map(|e| e[0].max(e[1])).max().unwrap_or(0);
    let mut apow = vec![ring.one()];
    let mut bpow = vec![ring.one()];
    for _ in 0..max_deg {
        apow.push(ring.mul(apow.last().expect("nonempty"), a));
        bpow.push(ring.mul(bpow.last().expect("nonempty"), b));
    }
    let mut acc = ring.zero().with_precision(a.precision.min(b.precision));
    for (e, c) in &law.terms {
        let s = reduce_unit_rational(ring, &(c * &pk))?;
        let term = ring.mul(&apow[e[0] as usize], &bpow[e[1] as usize]);
        acc = ring.add(&acc, &ring.scale_int(&term, s as i64));
    }
    let value = ring.normalize_scaled(&ScaledElement {
        element: acc,
        p_exponent: k,
    });
    let truncation = BigRational::from_integer(BigInt::from(law.max_degree + 1)) * vmin;
    let known = rat_int(value.element.precision as i64 - value.p_exponent as i64);
    Ok(SeriesValue {
        value,
        certified: truncation.min(known),
    })
}

/// Converts a scaled element to an integral one when its exponent is zero.
pub fn scaled_to_integral(ring: &TowerRing, x: &ScaledElement) -> Result<RingElement> {
    let s = ring.normalize_scaled(x);
    if s.p_exponent != 0 {
        return Err(Error::Precondition("value is not integral".into()));
    }
    Ok(s.element)
}

/// `x - y` for scaled elements, brought to a common denominator.
pub fn scaled_sub(ring: &TowerRing, x: &ScaledElement, y: &ScaledElement) -> ScaledElement {
    let k = x.p_exponent.max(y.p_exponent);
    let lift =
        |s: &ScaledElement| ring.scale_int(&s.element, ring.p().pow(k - s.p_exponent) as i64);
    ring.normalize_scaled(&ScaledElement {
        element: ring.sub(&lift(x), &lift(y)),
        p_exponent: k,
    })
}

/// `λ(F(a, b)) - λ(a) - λ(b)`: returns the valuation of the defect and the
/// certified bound it must meet.
pub fn log_additivity_defect(
    ring: &TowerRing,
    law: &MultiSeries,
    lambda: &TruncatedSeries,
    a: &RingElement,
    b: &RingElement,
) -> Result<(Valuation, BigRational)> {
    let fab = evaluate_group_law(ring, law, a, b)?;
    let fab_int = scaled_to_integral(ring, &fab.value)?;
    let zero = BigRational::zero();
    let la = evaluate_log_to(ring, lambda, a, &zero)?;
    let lb = evaluate_log_to(ring, lambda, b, &zero)?;
    let lf = evaluate_log_to(ring, lambda, &fab_int, &zero)?;
    let defect = scaled_sub(ring, &scaled_sub(ring, &lf.value, &la.value), &lb.value);
    let bound = [&fab.certified, &la.certified, &lb.certified, &lf.certified]
        .into_iter()
        .min()
        .expect("nonempty")
        .clone();
    Ok((ring.scaled_valuation(&defect), bound))
}

/// Outcome of the λ-compatibility check of resolvents.
#[derive(Clone, Debug)]
pub struct GaussLambdaReport {
    pub alpha_valuation: Valuation,
    pub lambda_valuation: Valuation,
    pub difference_valuation: Valuation,
    pub holds: bool,
}

/// For a uniformizer `α` of `Ψ_n` and `χ` of order `p^n`: checks
/// `v(⟨λ(α)|χ⟩ - ⟨α|χ⟩) ≥ 1 + v(⟨α|χ⟩)` and `v(⟨λ(α)|χ⟩) = v(⟨α|χ⟩) = (n+1)/2`.
/// Resolvents are taken over `Γ_n`.
pub fn gauss_lambda_check(
    ring: &TowerRing,
    lambda: &TruncatedSeries,
    alpha: &RingElement,
    chi: &GaloisCharacter,
) -> Result<GaussLambdaReport> {
    let n = ring.n();
    if n == 0 {
        return Err(Error::Precondition("needs n >= 1".into()));
    }
    let layer = ring.layer_psi(n)?;
    let expected_v = rat(1, ring.p().pow(n) as i64);
    if !ring.psi_contains(&layer, alpha)
        || ring.valuation_of(alpha) != Valuation::Finite(expected_v)
    {
        return Err(Error::Precondition(format!(
            "argument is not a uniformizer of Ψ_{n}"
        )));
    }
    if chi.wild_order_exponent() != n || chi.tame_exponent != 0 {
        return Err(Error::Precondition("χ must have order p^n on Γ_n".into()));
    }
    let log = evaluate_log(ring, lambda, alpha)?;
    let ra = ScaledElement {
        element: resolvent_gamma(ring, alpha, chi)?,
        p_exponent: 0,
    };
    let rl = ring.normalize_scaled(&ScaledElement {
        element: resolvent_gamma(ring, &log.value.element, chi)?,
        p_exponent: log.value.p_exponent,
    });
    let va = ring.scaled_valuation(&ra);
    let vl = ring.scaled_valuation(&rl);
    let diff = scaled_sub(ring, &rl, &ra);
    let vd = ring.scaled_valuation(&diff);
    let half = rat(n as i64 + 1, 2);
    let target = Valuation::Finite(half.clone());
    let bound = &half + BigRational::one();
    let holds = va == target && vl == target && vd.at_least(&bound) == Some(true);
    if !holds && vd.at_least(&bound).is_some() && va.is_finite() {
        return Err(Error::violation(
            LAMBDA_STATEMENT,
            format!("v<a|chi> = {va}, v<lambda(a)|chi> = {vl}, v(difference) = {vd}"),
        ));
    }
    Ok(GaussLambdaReport {
        alpha_valuation: va,
        lambda_valuation: vl,
        difference_valuation: vd,
        holds,
    })
}

/// Evaluates a polynomial over `W` at a ring element.
fn eval_base_poly(ring: &TowerRing, f: &[BaseElement], x: &RingElement) -> RingElement {
    f.iter()
        .rev()
        .fold(ring.zero().with_precision(x.precision), |acc, &c| {
            ring.add(&ring.mul(&acc, x), &ring.from_base(c))
        })
}

/// `δ(f) = (1 + v) f'(v) / f(v)` at the torsion point `v = ζ_{p^{level+1}} - 1`
/// of the multiplicative group, whose logarithm `log(1+t)` has `1/λ'(t) = 1 + t`.
pub fn coates_wiles_delta_mult(
    ring: &TowerRing,
    f: &[BaseElement],
    level: u32,
) -> Result<RingElement> {
    let v = ring.sub(&ring.root_of_unity(level + 1)?, &ring.one());
    coates_wiles_delta_at(ring, f, &v)
}

/// `δ(f)` at an arbitrary point `v` of positive valuation.
pub fn coates_wiles_delta_at(
    ring: &TowerRing,
    f: &[BaseElement],
    v: &RingElement,
) -> Result<RingElement> {
    if f.is_empty() || ring.base_valuation(f[0], 1) != Some(0) {
        return Err(Error::Precondition(
            "f must have a unit constant term".into(),
        ));
    }
    let fv = eval_base_poly(ring, f, v);
    let deriv: Vec<BaseElement> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| ring.base_mul(c, BaseElement::scalar(j as u64 % ring.modulus().m)))
        .collect();
    let dfv = if deriv.is_empty() {
        ring.zero()
    } else {
        eval_base_poly(ring, &deriv, v)
    };
    let inv = ring
        .unit_inverse(&fv)
        .map_err(|_| Error::NotInvertible("f(v) is not a unit".into()))?;
    let one_plus_v = ring.add(&ring.one(), v);
    Ok(ring.mul(&ring.mul(&one_plus_v, &dfv), &inv))
}

/// `δ(f)^σ = δ(f^σ)` evaluated at `σ(v)`, for every `σ ∈ Gal(L/Q_p)` listed.
pub fn coates_wiles_equivariance_check(
    ring: &TowerRing,
    f: &[BaseElement],
    level: u32,
    sigmas: &[GaloisElement],
) -> Result<bool> {
    let v = ring.sub(&ring.root_of_unity(level + 1)?, &ring.one());
    let delta = coates_wiles_delta_at(ring, f, &v)?;
    for &s in sigmas {
        let fs: Vec<BaseElement> = f
            .iter()
            .map(|&c| {
                if s.b % 2 == 1 {
                    ring.base_frobenius(c)
                } else {
                    c
                }
            })
            .collect();
        let lhs = ring.galois_act(s, &delta)?;
        let rhs = coates_wiles_delta_at(ring, &fs, &ring.galois_act(s, &v)?)?;
        if !ring.eq_mod_precision(&lhs, &rhs) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `δ_χ = p^{-(n+1)} Σ_{γ ∈ Γ_n} χ(γ) δ^γ`.
pub fn delta_chi(
    ring: &TowerRing,
    delta: &RingElement,
    chi: &GaloisCharacter,
) -> Result<ScaledElement> {
    Ok(ring.normalize_scaled(&ScaledElement {
        element: resolvent_gamma(ring, delta, chi)?,
        p_exponent: ring.n() + 1,
    }))
}

/// Closed form of `F` below degree `2p^2 - 1`:
/// `X + Y + ((X+Y)^{p^2} - X^{p^2} - Y^{p^2}) / p`.
pub fn group_law_leading_terms(p: u64, d: u32) -> MultiSeries {
    let x = MultiSeries::variable(2, d, 0);
    let y = MultiSeries::variable(2, d, 1);
    let s = x.add(&y);
    let pp = (p * p) as u32;
    let mut out = s.clone();
    if pp > d {
        return out;
    }
    let mut binom = BigInt::one();
    let inv_p = BigRational::new(BigInt::one(), BigInt::from(p));
    for i in 1..pp {
        binom = binom * BigInt::from(pp - i + 1) / BigInt::from(i);
        out.insert_add(
            vec![i, pp - i],
            BigRational::from_integer(binom.clone()) * &inv_p,
        );
    }
    out
}

/// Least common multiple of the coefficient denominators; `1` for integral series.
pub fn denominator_lcm(s: &MultiSeries) -> BigInt {
    s.terms
        .values()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn honda_log_shape() {
        let l = honda_log(5, 30).unwrap();
        assert_eq!(l.support(), vec![1, 25]);
        assert_eq!(l.coeff(25), rat(-1, 5));
        assert_eq!(l.derivative().coeff(0), rat_int(1));
        assert_eq!(
            l.tail,
            SeriesTail::Honda {
                p: 5,
                first_omitted: 2
            }
        );
        assert!(honda_log(5, 0).is_err());
    }

    #[test]
    fn inverse_of_identity_and_log() {
        let id = TruncatedSeries::identity(10);
        assert_eq!(series_inverse(&id).unwrap().coeffs, id.coeffs);
        let l = honda_log(3, 12).unwrap();
        let inv = series_inverse(&l).unwrap();
        assert_eq!(inv.coeff(9), rat(1, 3));
        assert!(log_inverse_roundtrip_check(3, 20).unwrap());
        let bad = TruncatedSeries::new(vec![rat_int(0), rat_int(2)], SeriesTail::Exact);
        assert!(series_inverse(&bad).is_err());
    }

    #[test]
    fn group_law_small_degree_is_additive() {
        let f = formal_group_law(5, 24).unwrap();
        let s = MultiSeries::variable(2, 24, 0).add(&MultiSeries::variable(2, 24, 1));
        assert_eq!(f, s);
    }

    #[test]
    fn group_law_closed_form() {
        let f = formal_group_law(5, 26).unwrap();
        assert_eq!(f, group_law_leading_terms(5, 26));
        assert!(f.is_p_integral(5));
        // F(X, 0) = X
        let x = MultiSeries::variable(1, 26, 0);
        let fx0 = f.compose(&[x.clone(), MultiSeries::zero(1, 26)]).unwrap();
        assert_eq!(fx0, x);
    }

    #[test]
    fn associativity_p3() {
        assert!(group_law_associativity_check(3, 10).unwrap());
    }

    #[test]
    fn log_of_small_argument() {
        let r = TowerRing::from_params(5, 1, 1).unwrap();
        let l = honda_log(5, 26).unwrap();
        assert!(evaluate_log(&r, &l, &r.zero())
            .unwrap()
            .value
            .element
            .coeffs
            .iter()
            .all(|&c| c == 0));
        // v(α) ≥ 1: λ(α) ≡ α mod p^2 α
        let a = r.from_int(5);
        let la = evaluate_log(&r, &l, &a).unwrap();
        let la = scaled_to_integral(&r, &la.value).unwrap();
        let d = r.sub(&la, &a);
        assert!(r.valuation_of(&d).at_least(&rat_int(3)).unwrap());
    }

    #[test]
    fn delta_of_simple_series() {
        let r = TowerRing::from_params(5, 2, 1).unwrap();
        let one_plus_t = [BaseElement::scalar(1), BaseElement::scalar(1)];
        assert_eq!(
            coates_wiles_delta_mult(&r, &one_plus_t, 1).unwrap(),
            r.one()
        );
        let constant = [BaseElement { c: [3, 1] }];
        assert!(r.is_zero(&coates_wiles_delta_mult(&r, &constant, 1).unwrap()));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Vec<BaseElement> = (0..4).map(|_| r.random_base_unit(&mut rng)).collect();
        let sigmas = r.full_galois_group();
        assert!(coates_wiles_equivariance_check(&r, &f, 1, &sigmas).unwrap());
        assert!(coates_wiles_delta_mult(&r, &[BaseElement::scalar(5)], 1).is_err());
    }
}
