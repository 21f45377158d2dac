//! Herbrand functions, ramification filtrations, differents and trace ideals of
//! the cyclotomic tower, with brute-force cross-checks.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{format_rational, rat_int, Valuation};
use crate::tower::{GaloisElement, RingElement, TowerRing};

const RAM_STATEMENT: &str = "upper ramification groups of L/K are G^0/G^1 of order p-1 and G^i/G^{i+1} of order p for 1<=i<=n";

/// A piecewise-linear, increasing Herbrand function `ψ` with exact breakpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HerbrandFunction {
    /// `(u, ψ(u))`, strictly increasing in both coordinates, starting at `(0, 0)`.
    pub breakpoints: Vec<(BigRational, BigRational)>,
}

impl HerbrandFunction {
    /// `ψ_{L/K}` for `L = K(ζ_{p^{n+1}})`: `ψ(j) = p^j - 1` for integers
    /// `0 ≤ j ≤ n+1`, linear in between.
    pub fn cyclotomic(p: u64, n: u32) -> Self {
        let breakpoints = (0..=n + 1)
            .map(|j| (rat_int(j as i64), rat_int(p.pow(j) as i64 - 1)))
            .collect();
        HerbrandFunction { breakpoints }
    }

    /// Builds `ψ` from lower ramification indices `i(σ) = v_L(σπ - π)` of the
    /// non-identity elements of a totally ramified group, as the inverse of
    /// `φ(t) = ∫_0^t |G_s| / |G_0| ds`, extended up to `t_end`.
    pub fn from_lower_indices(indices: &[u64], t_end: u64) -> Result<Self> {
        let order = indices.len() as i64 + 1;
        let mut jumps: Vec<u64> = indices.iter().map(|&i| i - 1).collect();
        jumps.sort_unstable();
        jumps.dedup();
        if jumps.last().is_some_and(|&j| j > t_end) {
            return Err(Error::InvalidParameter(format!(
                "ramification extends past t = {t_end}"
            )));
        }
        let mut bps = vec![(BigRational::zero(), BigRational::zero())];
        let mut t_prev = 0u64;
        let mut phi = BigRational::zero();
        let mut cuts = jumps.clone();
        cuts.push(t_end);
        for t in cuts {
            if t <= t_prev {
                continue;
            }
            // G_s is constant on (t_prev, t], equal to G_t.
            let size = 1 + indices.iter().filter(|&&i| i > t).count() as i64;
            phi += BigRational::new(
                BigInt::from((t - t_prev) as i64 * size),
                BigInt::from(order),
            );
            bps.push((phi.clone(), rat_int(t as i64)));
            t_prev = t;
        }
        Ok(HerbrandFunction { breakpoints: bps })
    }

    pub fn domain_end(&self) -> &BigRational {
        &self.breakpoints.last().expect("nonempty").0
    }

    fn interpolate(
        pts: &[(BigRational, BigRational)],
        x: &BigRational,
        swap: bool,
    ) -> Result<BigRational> {
        let key = |pt: &(BigRational, BigRational)| if swap { pt.1.clone() } else { pt.0.clone() };
        let val = |pt: &(BigRational, BigRational)| if swap { pt.0.clone() } else { pt.1.clone() };
        let first = key(&pts[0]);
        let last = key(pts.last().expect("nonempty"));
        if *x < first || *x > last {
            return Err(Error::InvalidParameter(format!(
                "argument {} outside [{}, {}]",
                format_rational(x),
                format_rational(&first),
                format_rational(&last)
            )));
        }
        for w in pts.windows(2) {
            let (x0, x1) = (key(&w[0]), key(&w[1]));
            if *x >= x0 && *x <= x1 {
                let (y0, y1) = (val(&w[0]), val(&w[1]));
                return Ok(&y0 + (&y1 - &y0) * (x - &x0) / (&x1 - &x0));
            }
        }
        Ok(val(&pts[0]))
    }

    pub fn psi(&self, u: &BigRational) -> Result<BigRational> {
        Self::interpolate(&self.breakpoints, u, false)
    }

    /// The inverse function `φ`.
    pub fn phi(&self, v: &BigRational) -> Result<BigRational> {
        Self::interpolate(&self.breakpoints, v, true)
    }

    /// Slopes `(G^0 : G^u)` on each linear piece.
    pub fn slopes(&self) -> Vec<BigRational> {
        self.breakpoints
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
            .collect()
    }
}

/// `ψ_{L/K}(j)` for `0 ≤ j ≤ n+1`.
pub fn herbrand_psi(p: u64, n: u32, j: &BigRational) -> Result<BigRational> {
    HerbrandFunction::cyclotomic(p, n).psi(j)
}

/// Upper and lower ramification data of `L/K`.
#[derive(Clone, Debug, Serialize)]
pub struct RamificationFiltration {
    pub upper_jumps: Vec<u32>,
    /// `groups[j]` is `G^j` for `0 ≤ j ≤ n+1`.
    #[serde(skip)]
    pub groups: Vec<Vec<GaloisElement>>,
    /// `(σ.a, i(σ))` for every non-identity `σ`.
    pub lower_indices: Vec<(u64, u64)>,
}

impl RamificationFiltration {
    /// Distinct lower jumps `i(σ) - 1`.
    pub fn lower_jumps(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.lower_indices.iter().map(|&(_, i)| i - 1).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Number of elements per lower index.
    pub fn index_histogram(&self) -> BTreeMap<u64, usize> {
        let mut h = BTreeMap::new();
        for &(_, i) in &self.lower_indices {
            *h.entry(i).or_insert(0) += 1;
        }
        h
    }
}

/// Largest `j ≤ n+1` with `a ≡ 1 mod p^j`.
fn depth(ring: &TowerRing, a: u64) -> u32 {
    let p = ring.p();
    let mut j = 0;
    while j <= ring.n() && (a % ring.zeta_order() + ring.zeta_order() - 1) % p.pow(j + 1) == 0 {
        j += 1;
    }
    j
}

/// Predicted lower index `v_L(σπ - π)` of a non-identity `σ`: 1 outside `G^1`,
/// `p^j` for `σ ∈ G^j \ G^{j+1}`.
pub fn predicted_lower_index(ring: &TowerRing, a: u64) -> u64 {
    match depth(ring, a) {
        0 => 1,
        j => ring.p().pow(j),
    }
}

/// Computes `i(σ) = v_L(σϖ - ϖ)` for every `σ ≠ 1` and checks it against the
/// filtration predicted by the upper jumps `{0, …, n}`.
pub fn lower_numbering_empirical(
    ring: &TowerRing,
    uniformizer: &RingElement,
) -> Result<RamificationFiltration> {
    if ring.valuation_l(uniformizer) != Some(1) {
        return Err(Error::Precondition(
            "argument is not a uniformizer of L".into(),
        ));
    }
    let mut lower = Vec::new();
    for g in ring.galois_group() {
        if g.a == 1 {
            continue;
        }
        let diff = ring.sub(&ring.act(g.a, uniformizer), uniformizer);
        let i = ring.valuation_l(&diff).ok_or_else(|| {
            Error::PrecisionExhausted(format!("σ = {} moves ϖ below working precision", g.a))
        })?;
        let expected = predicted_lower_index(ring, g.a);
        if i != expected {
            return Err(Error::violation(
                RAM_STATEMENT,
                format!("σ: ζ ↦ ζ^{} has i(σ) = {i}, expected {expected}", g.a),
            ));
        }
        lower.push((g.a, i));
    }
    let mut groups = Vec::new();
    for j in 0..=ring.n() + 1 {
        groups.push(ring.layer_group(j)?);
    }
    // Upper numbering: G^j / G^{j+1} has order p-1 for j = 0 and p for 1 ≤ j ≤ n.
    let p = ring.p() as usize;
    for j in 0..=ring.n() as usize {
        let ratio = groups[j].len() / groups[j + 1].len();
        let expected = if j == 0 { p - 1 } else { p };
        if ratio != expected {
            return Err(Error::violation(
                RAM_STATEMENT,
                format!("|G^{j}/G^{}| = {ratio}, expected {expected}", j + 1),
            ));
        }
    }
    // ψ built from the empirical lower numbering must agree with ψ(j) = p^j - 1.
    let indices: Vec<u64> = lower.iter().map(|&(_, i)| i).collect();
    let empirical = HerbrandFunction::from_lower_indices(&indices, ring.zeta_order() - 1)?;
    let theory = HerbrandFunction::cyclotomic(ring.p(), ring.n());
    if empirical != theory {
        return Err(Error::violation(
            "ψ_{K_i/K}(j) = p^j - 1",
            format!("empirical breakpoints {:?}", empirical.breakpoints),
        ));
    }
    Ok(RamificationFiltration {
        upper_jumps: (0..=ring.n()).collect(),
        groups,
        lower_indices: lower,
    })
}

/// Different exponent `(p-1)p^i` of `K_{i+1}/K_i`, `1 ≤ i ≤ n`, in units of `v_{K_{i+1}}`.
pub fn different_exponent(p: u64, n: u32, i: u32) -> Result<u64> {
    if i == 0 || i > n {
        return Err(Error::InvalidParameter(format!("step {i} outside 1..={n}")));
    }
    Ok((p - 1) * p.pow(i))
}

/// `v_{K_{i+1}}(∏_{σ ≠ 1} (σϖ - ϖ))` over `Gal(K_{i+1}/K_i)` with `ϖ = ζ_{p^{i+1}} - 1`.
pub fn empirical_different_exponent(ring: &TowerRing, i: u32) -> Result<u64> {
    different_exponent(ring.p(), ring.n(), i)?;
    let varpi = ring.sub(&ring.root_of_unity(i + 1)?, &ring.one());
    let mut total = BigRational::zero();
    for g in ring.coset_representatives(i + 1, i)? {
        if g.a == 1 {
            continue;
        }
        let d = ring.sub(&ring.act(g.a, &varpi), &varpi);
        match ring.valuation_of(&d) {
            Valuation::Finite(v) => total += v,
            other => {
                return Err(Error::PrecisionExhausted(format!(
                    "conjugate difference has valuation {other}"
                )))
            }
        }
    }
    // convert v_p to v_{K_{i+1}} (ramification index p^i (p-1))
    let e = BigInt::from((ring.p() - 1) * ring.p().pow(i));
    let scaled = total * BigRational::from_integer(e);
    if !scaled.is_integer() {
        return Err(Error::Internal("non-integral different exponent".into()));
    }
    Ok(scaled.to_integer().try_into().expect("small exponent"))
}

/// Different of `L/K` by transitivity: `Σ_i e(L/K_{i+1}) d(K_{i+1}/K_i)`, with
/// the tame step contributing `p - 2`.
pub fn tower_different_exponent(p: u64, n: u32) -> u64 {
    let mut d = p.pow(n) * (p - 2);
    for i in 1..=n {
        d += p.pow(n - i) * (p - 1) * p.pow(i);
    }
    d
}

/// `Σ_{σ ≠ 1} v_L(σϖ - ϖ)` over `Gal(L/K)`: the different exponent of `L/K`.
pub fn empirical_tower_different(ring: &TowerRing, uniformizer: &RingElement) -> Result<u64> {
    let mut total = 0;
    for g in ring.galois_group() {
        if g.a == 1 {
            continue;
        }
        let d = ring.sub(&ring.act(g.a, uniformizer), uniformizer);
        total += ring
            .valuation_l(&d)
            .ok_or_else(|| Error::PrecisionExhausted("conjugate difference vanishes".into()))?;
    }
    Ok(total)
}

/// Valuation of a generator of `Tr_{K_{i+1}/K_i}(𝔪_{i+1}^k)`, for `1 ≤ i ≤ n`
/// and `0 ≤ k ≤ p-1`; the result must be `1`.
pub fn trace_ideal_image(ring: &TowerRing, i: u32, k: u32) -> Result<Valuation> {
    let p = ring.p();
    if k as u64 > p - 1 {
        return Err(Error::Precondition(format!("exponent k = {k} exceeds p-1")));
    }
    if i == 0 || i > ring.n() {
        return Err(Error::Precondition(format!(
            "step {i} outside 1..={}",
            ring.n()
        )));
    }
    // 𝔪^k is spanned over O_{K_i} by ϖ^{k+j}, 0 ≤ j < p.
    let varpi = ring.sub(&ring.root_of_unity(i + 1)?, &ring.one());
    let mut power = ring.pow(&varpi, k as u64);
    let mut best: Option<Valuation> = None;
    for _ in 0..p {
        let t = ring.relative_trace(&power, i)?;
        let v = ring.valuation_of(&t);
        best = Some(match best {
            None => v,
            Some(b) => min_valuation(b, v),
        });
        power = ring.mul(&power, &varpi);
    }
    let v = best.expect("p > 0 terms");
    if v != Valuation::Finite(BigRational::one()) {
        return Err(Error::violation(
            "Tr_{i+1/i}(m_{i+1}^k) = p O_{K_i} for 0 <= k <= p-1",
            format!("step {i}, k = {k}: generator valuation {v}"),
        ));
    }
    Ok(v)
}

pub fn min_valuation(a: Valuation, b: Valuation) -> Valuation {
    use Valuation::*;
    match (&a, &b) {
        (Infinite, _) => b,
        (_, Infinite) => a,
        (Finite(x), Finite(y)) => {
            if x <= y {
                a
            } else {
                b
            }
        }
        (Finite(x), AtLeast(y)) | (AtLeast(y), Finite(x)) => {
            if x <= y {
                Finite(x.clone())
            } else {
                AtLeast(y.clone())
            }
        }
        (AtLeast(x), AtLeast(y)) => AtLeast(x.min(y).clone()),
    }
}

/// Checks `v_p(Tr_{L/K}((σα - α)β)) ≥ n+1` for `σ ∈ G^n`.
pub fn trace_one_check(
    ring: &TowerRing,
    sigma: GaloisElement,
    alpha: &RingElement,
    beta: &RingElement,
) -> Result<bool> {
    let n = ring.n();
    if n == 0 || depth(ring, sigma.a) < n || sigma.b != 0 {
        return Err(Error::Precondition(format!(
            "σ: ζ ↦ ζ^{} is not in G^{n}",
            sigma.a
        )));
    }
    let diff = ring.sub(&ring.galois_act(sigma, alpha)?, alpha);
    let t = ring.trace_pairing(&diff, beta);
    let prec = diff.precision.min(beta.precision);
    Ok(match ring.base_valuation(t, prec) {
        None => prec > n,
        Some(v) => v > n,
    })
}

/// `v_{Ψ_n}(σπ_n - π_n) - 1` for `σ = γ^{p^{j-1}}`, `1 ≤ j ≤ n`, which should be
/// `ψ_{Ψ_n/K}(j) = (p^j - 1)/(p - 1)`.
pub fn psi_layer_lower_indices(
    ring: &TowerRing,
    pi_n: &RingElement,
) -> Result<Vec<(u32, u64, u64)>> {
    let p = ring.p();
    let n = ring.n();
    let e = ring.e() as u64;
    let psi_e = p.pow(n);
    let mut out = Vec::new();
    for j in 1..=n {
        let sigma = ring.gamma_power(p.pow(j - 1));
        let d = ring.sub(&ring.act(sigma, pi_n), pi_n);
        let vl = ring
            .valuation_l(&d)
            .ok_or_else(|| Error::PrecisionExhausted("σπ_n - π_n vanishes".into()))?;
        // v_{Ψ_n} = v_L · p^n / e
        if (vl * psi_e) % e != 0 {
            return Err(Error::Internal("valuation not in Ψ_n's value group".into()));
        }
        let v_psi = vl * psi_e / e;
        let expected = (p.pow(j) - 1) / (p - 1);
        if v_psi - 1 != expected {
            return Err(Error::violation(
                "lower ramification jumps of the Z_p-layer are (p^j-1)/(p-1)",
                format!(
                    "j = {j}: v_Ψ(σπ_n - π_n) - 1 = {}, expected {expected}",
                    v_psi - 1
                ),
            ));
        }
        out.push((j, v_psi - 1, expected));
    }
    Ok(out)
}

/// Minimal `v_p(Tr_{L/K}(π^s))` for `s ∈ [start, start + e)`: the valuation of
/// `Tr_{L/K}(𝔪^start)`.
pub fn trace_of_power_ideal(ring: &TowerRing, start: u64) -> Valuation {
    let mut power = ring.pi_power(start);
    let mut best = Valuation::Infinite;
    for _ in 0..ring.e() {
        let t = ring.trace_to_base(&power);
        let v = match ring.base_valuation(t, power.precision) {
            Some(v) => Valuation::Finite(rat_int(v as i64)),
            None => Valuation::AtLeast(rat_int(power.precision as i64)),
        };
        best = min_valuation(best, v);
        power = ring.mul_pi(&power);
    }
    best
}
