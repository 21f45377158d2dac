//! Characters of `G = Gal(L/K)`, local resolvents `⟨α|χ⟩ = Σ_γ χ(γ) α^γ`, the
//! Lagrange identity, and the explicit construction of elements `β` realizing
//! `v_p(⟨α|χ⟩) + v_p(⟨β|χ^{-1}⟩) = n + 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Fq, Matrix, ResidueField};
use crate::padic::{format_rational, Modulus, Valuation};
use crate::tower::{BaseElement, GaloisElement, RingElement, TowerRing};

const EQUALITY_STATEMENT: &str = "v(<a|chi>) + v(<b|chi^-1>) = n+1 is attained for admissible a";

/// A character `χ = ω^k ψ_c` of `G = Δ × G^1`: `ω` is the Teichmüller character
/// on `Δ` and `ψ_c(γ^j) = ζ_{p^n}^{c j}` with `γ = 1 + p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GaloisCharacter {
    pub p: u64,
    pub n: u32,
    /// Exponent of the Teichmüller character, modulo `p - 1`.
    pub tame_exponent: u64,
    /// `c` modulo `p^n`.
    pub wild_exponent: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl GaloisCharacter {
    pub fn new(p: u64, n: u32, tame_exponent: i64, wild_exponent: i64) -> Self {
        let pn = p.pow(n) as i64;
        GaloisCharacter {
            p,
            n,
            tame_exponent: tame_exponent.rem_euclid(p as i64 - 1) as u64,
            wild_exponent: wild_exponent.rem_euclid(pn) as u64,
        }
    }

    pub fn trivial(p: u64, n: u32) -> Self {
        Self::new(p, n, 0, 0)
    }

    /// The character of order `p^n` on `G^1` with `ψ(γ) = ζ_{p^n}^c`, trivial on `Δ`.
    pub fn wild(p: u64, n: u32, c: i64) -> Self {
        Self::new(p, n, 0, c)
    }

    pub fn inverse(&self) -> Self {
        Self::new(
            self.p,
            self.n,
            -(self.tame_exponent as i64),
            -(self.wild_exponent as i64),
        )
    }

    pub fn is_trivial(&self) -> bool {
        self.tame_exponent == 0 && self.wild_exponent == 0
    }

    /// `s` with `ψ` of order `p^s`.
    pub fn wild_order_exponent(&self) -> u32 {
        if self.wild_exponent == 0 {
            return 0;
        }
        let md = Modulus::new(self.p, self.n.max(1));
        self.n - md.valuation(self.wild_exponent)
    }

    pub fn tame_order(&self) -> u64 {
        let m = self.p - 1;
        if self.tame_exponent == 0 {
            1
        } else {
            m / num_integer::gcd(m, self.tame_exponent)
        }
    }

    pub fn order(&self) -> u64 {
        self.tame_order() * self.p.pow(self.wild_order_exponent())
    }

    /// Exponent `c` with conductor `p^c`.
    pub fn conductor_exponent(&self) -> u32 {
        match self.wild_order_exponent() {
            0 if self.tame_exponent == 0 => 0,
            0 => 1,
            s => s + 1,
        }
    }

    /// Even when the conductor is an even power of `p`.
    pub fn parity(&self) -> Parity {
        if self.conductor_exponent() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn check_ring(&self, ring: &TowerRing) -> Result<()> {
        if ring.p() != self.p || ring.n() != self.n {
            return Err(Error::InvalidParameter(format!(
                "character for (p={}, n={}) used on ring (p={}, n={})",
                self.p,
                self.n,
                ring.p(),
                ring.n()
            )));
        }
        Ok(())
    }

    /// `χ(σ_a)` as `scalar · ζ^{shift}`: returns `(scalar, shift)`.
    pub fn value(&self, ring: &TowerRing, a: u64) -> Result<(u64, u64)> {
        self.check_ring(ring)?;
        let (r, j) = ring.decompose_unit(a)?;
        let scalar = ring.modulus().pow(ring.teichmuller(r), self.tame_exponent);
        let q = ring.zeta_order() as u128;
        let shift = (self.p as u128 * self.wild_exponent as u128 * j as u128 % q) as u64;
        Ok((scalar, shift))
    }

    /// `χ(σ_a)` as a ring element.
    pub fn value_element(&self, ring: &TowerRing, a: u64) -> Result<RingElement> {
        let (s, shift) = self.value(ring, a)?;
        Ok(ring.scale_int(&ring.zeta_power(shift as i64), s as i64))
    }
}

/// All characters of `G`, tame exponent major.
pub fn all_characters(p: u64, n: u32) -> Vec<GaloisCharacter> {
    let pn = p.pow(n);
    (0..p - 1)
        .flat_map(|k| (0..pn).map(move |c| GaloisCharacter::new(p, n, k as i64, c as i64)))
        .collect()
}

/// Characters of `G^1 ≅ Γ_n` of exact order `p^n` (`c` a unit mod `p^n`).
pub fn characters_of_order_pn(p: u64, n: u32) -> Vec<GaloisCharacter> {
    let pn = p.pow(n);
    (1..pn)
        .filter(|c| c % p != 0)
        .map(|c| GaloisCharacter::wild(p, n, c as i64))
        .collect()
}

/// A uniformly random character of order `p^n` on `G^1`.
pub fn random_character_of_order_pn<R: Rng + ?Sized>(
    p: u64,
    n: u32,
    rng: &mut R,
) -> GaloisCharacter {
    let pn = p.pow(n);
    loop {
        let c = rng.gen_range(1..pn.max(2));
        if c % p != 0 {
            return GaloisCharacter::wild(p, n, c as i64);
        }
    }
}

/// `⟨α|χ⟩_G = Σ_{γ ∈ G} χ(γ) α^γ`.
pub fn resolvent(
    ring: &TowerRing,
    alpha: &RingElement,
    chi: &GaloisCharacter,
) -> Result<RingElement> {
    chi.check_ring(ring)?;
    let mut buf = ring.new_buffer();
    for g in ring.galois_group() {
        let (s, shift) = chi.value(ring, g.a)?;
        ring.accumulate_twisted(&mut buf, alpha, g.a, shift, BaseElement::scalar(s));
    }
    Ok(ring.finish_buffer(buf, alpha.precision))
}

/// `⟨α|ψ⟩_{Γ_n} = Σ_{j < p^n} ψ(γ^j) α^{γ^j}`, for a character trivial on `Δ`.
pub fn resolvent_gamma(
    ring: &TowerRing,
    alpha: &RingElement,
    chi: &GaloisCharacter,
) -> Result<RingElement> {
    chi.check_ring(ring)?;
    if chi.tame_exponent != 0 {
        return Err(Error::Precondition(
            "a character of Γ_n must be trivial on Δ".into(),
        ));
    }
    let mut buf = ring.new_buffer();
    for j in 0..ring.p().pow(ring.n()) {
        let a = ring.gamma_power(j);
        let (s, shift) = chi.value(ring, a)?;
        ring.accumulate_twisted(&mut buf, alpha, a, shift, BaseElement::scalar(s));
    }
    Ok(ring.finish_buffer(buf, alpha.precision))
}

/// `α_ω = Σ_{ρ ∈ Δ} ω^k(ρ) α^ρ` (unnormalized isotypic projection).
pub fn omega_component(ring: &TowerRing, alpha: &RingElement, tame_exponent: u64) -> RingElement {
    let mut buf = ring.new_buffer();
    for (i, &t) in ring.delta_elements().iter().enumerate() {
        let s = ring.modulus().pow(
            ring.teichmuller(i as u64 + 1),
            tame_exponent % (ring.p() - 1),
        );
        ring.accumulate_twisted(&mut buf, alpha, t, 0, BaseElement::scalar(s));
    }
    ring.finish_buffer(buf, alpha.precision)
}

/// `Σ_{γ ∈ G} Tr_{L/K}(α^γ β) χ(γ)`.
pub fn twisted_trace_sum(
    ring: &TowerRing,
    alpha: &RingElement,
    beta: &RingElement,
    chi: &GaloisCharacter,
) -> Result<RingElement> {
    let mut acc = ring
        .zero()
        .with_precision(alpha.precision.min(beta.precision));
    for g in ring.galois_group() {
        let t = ring.trace_pairing(&ring.act(g.a, alpha), beta);
        let (s, shift) = chi.value(ring, g.a)?;
        let term = ring.scale_base(
            &ring.zeta_power(shift as i64),
            ring.base_mul(t, BaseElement::scalar(s)),
        );
        acc = ring.add(&acc, &term);
    }
    Ok(acc)
}

/// Verifies `Σ_γ Tr(α^γ β) γ = (Σ_γ α^γ γ)(Σ_γ β^γ γ^{-1})` in the group ring
/// over `O_L`, coefficient by coefficient. Costs `|G|^2` ring products.
pub fn lagrange_group_ring_check(
    ring: &TowerRing,
    alpha: &RingElement,
    beta: &RingElement,
) -> Result<bool> {
    let group = ring.galois_group();
    let mq = ring.unit_modulus();
    let alpha_conj: Vec<RingElement> = group.iter().map(|g| ring.act(g.a, alpha)).collect();
    let beta_conj: Vec<RingElement> = group.iter().map(|g| ring.act(g.a, beta)).collect();
    let index = |a: u64| group.iter().position(|g| g.a == a).expect("group element");
    // Coefficient of g on the right: Σ_{h k^{-1} = g} α^h β^k = Σ_k α^{gk} β^k.
    for (gi, g) in group.iter().enumerate() {
        let mut rhs = ring.zero();
        for (ki, k) in group.iter().enumerate() {
            let h = index(mq.mul(g.a, k.a));
            rhs = ring.add(&rhs, &ring.mul(&alpha_conj[h], &beta_conj[ki]));
        }
        let lhs = ring.from_base(ring.trace_pairing(&alpha_conj[gi], beta));
        if !ring.eq_mod_precision(&lhs, &rhs) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Verifies `⟨α|χ⟩⟨β|χ^{-1}⟩ = Σ_γ Tr(α^γ β) χ(γ)` for the given characters.
/// The traces `Tr(α^γ β)` do not depend on `χ` and are computed once.
pub fn lagrange_character_check(
    ring: &TowerRing,
    alpha: &RingElement,
    beta: &RingElement,
    characters: &[GaloisCharacter],
) -> Result<bool> {
    let traces: Vec<(u64, RingElement)> = ring
        .galois_group()
        .iter()
        .map(|g| {
            (
                g.a,
                ring.from_base(ring.trace_pairing(&ring.act(g.a, alpha), beta)),
            )
        })
        .collect();
    for chi in characters {
        let lhs = ring.mul(
            &resolvent(ring, alpha, chi)?,
            &resolvent(ring, beta, &chi.inverse())?,
        );
        let mut buf = ring.new_buffer();
        for (a, t) in &traces {
            let (s, shift) = chi.value(ring, *a)?;
            ring.accumulate_twisted(&mut buf, t, 1, shift, BaseElement::scalar(s));
        }
        let rhs = ring.finish_buffer(buf, alpha.precision.min(beta.precision));
        if !ring.eq_mod_precision(&lhs, &rhs) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Both forms of the Lagrange identity, the character form over every character.
pub fn lagrange_identity_check(
    ring: &TowerRing,
    alpha: &RingElement,
    beta: &RingElement,
) -> Result<bool> {
    Ok(lagrange_group_ring_check(ring, alpha, beta)?
        && lagrange_character_check(ring, alpha, beta, &all_characters(ring.p(), ring.n()))?)
}

fn require_full_conductor(ring: &TowerRing, chi: &GaloisCharacter) -> Result<()> {
    if chi.conductor_exponent() != ring.n() + 1 {
        return Err(Error::Precondition(format!(
            "character has conductor p^{}, expected p^{}",
            chi.conductor_exponent(),
            ring.n() + 1
        )));
    }
    Ok(())
}

/// `v_p(⟨α|χ⟩) + v_p(⟨β|χ^{-1}⟩)`.
pub fn valuation_sum(
    ring: &TowerRing,
    alpha: &RingElement,
    beta: &RingElement,
    chi: &GaloisCharacter,
) -> Result<Valuation> {
    let va = ring.valuation_of(&resolvent(ring, alpha, chi)?);
    let vb = ring.valuation_of(&resolvent(ring, beta, &chi.inverse())?);
    Ok(va.add(&vb))
}

/// Checks `v_p(⟨α|χ⟩) + v_p(⟨β|χ^{-1}⟩) ≥ n + 1` for `χ` of conductor `p^{n+1}`.
/// `None` when precision does not decide.
pub fn resolvent_lower_bound_check(
    ring: &TowerRing,
    alpha: &RingElement,
    beta: &RingElement,
    chi: &GaloisCharacter,
) -> Result<Option<bool>> {
    require_full_conductor(ring, chi)?;
    let sum = valuation_sum(ring, alpha, beta, chi)?;
    Ok(sum.at_least(&BigRational::from_integer(BigInt::from(ring.n() + 1))))
}

/// Result of the dual-element construction.
#[derive(Clone, Debug)]
pub struct DualBeta {
    pub beta: RingElement,
    /// The element `α'` (ω-projection, trace-corrected) fed to the linear algebra.
    pub alpha_prime: RingElement,
    /// `v_L(α_ω)`.
    pub alpha_omega_valuation: u64,
    /// `v_p(⟨α|χ⟩)`.
    pub alpha_valuation: Valuation,
    /// `v_p(⟨β|χ^{-1}⟩)`.
    pub beta_valuation: Valuation,
    /// `v_p(Σ_{j < p^{n-1}} Tr(α'^{γ^j} β))`, equal to `n`.
    pub partial_sum_valuation: u32,
}

fn residue_field(ring: &TowerRing) -> ResidueField {
    ResidueField::new(ring.p(), ring.f(), ring.nonresidue())
}

fn residue(ring: &TowerRing, c: BaseElement) -> Fq {
    [c.c[0] % ring.p(), c.c[1] % ring.p()]
}

fn lift(c: Fq) -> BaseElement {
    BaseElement { c }
}

/// `p^{-shift} Tr_{L/K}(π^{start+i} π^{start+j}) mod p` for `i, j < size`.
fn trace_gram(ring: &TowerRing, start: usize, size: usize, shift: u32) -> Result<Matrix> {
    let p = ring.p();
    let k = residue_field(ring);
    let mut traces = Vec::with_capacity(2 * size);
    let mut power = ring.pi_power(2 * start as u64);
    for _ in 0..2 * size - 1 {
        let t = ring.trace_to_base(&power);
        let mut red = [0u64; 2];
        for (c, r) in t.c.iter().zip(red.iter_mut()) {
            let pk = p.pow(shift);
            if c % pk != 0 {
                return Err(Error::Internal(format!(
                    "trace of a power of π is not divisible by p^{shift}"
                )));
            }
            *r = (c / pk) % p;
        }
        traces.push(red);
        power = ring.mul_pi(&power);
    }
    let mut g = Matrix::zeros(size, size);
    for i in 0..size {
        for j in 0..size {
            g.set(i, j, k.reduce(traces[i + j]));
        }
    }
    Ok(g)
}

/// First `count` `π`-digits of `x` modulo `p`, skipping `skip` leading digits.
fn residue_digits(ring: &TowerRing, x: &RingElement, skip: usize, count: usize) -> Vec<Fq> {
    ring.pi_digits(x)[skip..skip + count]
        .iter()
        .map(|&d| residue(ring, d))
        .collect()
}

/// Constructs `β` with `v_p(⟨α|χ⟩) + v_p(⟨β|χ^{-1}⟩) = n + 1` for `α ∈ 𝔪_L`
/// with `v_L(α_ω) < p`, following the residue-space construction:
/// the pairing `(x, y) ↦ p^{-n} Tr(xy) mod p` on `V = O_L / 𝔪^{p^n}` is
/// non-degenerate, and `α', γα', …, γ^{p^{n-1}-1}α'` are independent in `V`.
pub fn find_dual_beta(
    ring: &TowerRing,
    alpha: &RingElement,
    chi: &GaloisCharacter,
) -> Result<DualBeta> {
    let n = ring.n();
    let p = ring.p();
    if n == 0 {
        return Err(Error::Precondition(
            "the dual-element construction needs n >= 1".into(),
        ));
    }
    require_full_conductor(ring, chi)?;
    let vl_alpha = ring.valuation_l(alpha);
    if vl_alpha == Some(0) {
        return Err(Error::Precondition(
            "α must lie in the maximal ideal".into(),
        ));
    }
    let alpha_omega = omega_component(ring, alpha, chi.tame_exponent);
    let vl = ring
        .valuation_l(&alpha_omega)
        .ok_or_else(|| Error::Precondition("α_ω vanishes to working precision".into()))?;
    if vl >= p {
        return Err(Error::Precondition(format!(
            "v_L(α_ω) = {vl} is not below p = {p}"
        )));
    }
    let md = ring.modulus();
    let trace = ring.trace_to_base(&alpha_omega);
    let alpha_prime = if chi.tame_exponent == 0 {
        // α' = α_ω - a with Tr(α_ω) = p^n (p-1) a
        let pn = p.pow(n);
        if trace.c.iter().any(|c| c % pn != 0) {
            return Err(Error::Precondition(
                "Tr(α_ω) is not divisible by p^n".into(),
            ));
        }
        let inv = md.inv(p - 1).expect("p-1 is a unit");
        let a = BaseElement {
            c: [md.mul(trace.c[0] / pn, inv), md.mul(trace.c[1] / pn, inv)],
        };
        ring.sub(&alpha_omega, &ring.from_base(a))
    } else {
        if !trace.is_zero() {
            return Err(Error::Internal(
                "a nontrivial ω-component has nonzero trace".into(),
            ));
        }
        alpha_omega.clone()
    };

    let dim = p.pow(n) as usize;
    let orbit = p.pow(n - 1) as usize;
    let gamma = ring.gamma().a;
    let in_m1 = |x: &RingElement| ring.valuation_l(x).map_or(true, |v| v >= dim as u64);

    // nilpotency pattern of N = γ - 1 on V
    let mut nx = alpha_prime.clone();
    for _ in 0..orbit - 1 {
        nx = ring.sub(&ring.act(gamma, &nx), &nx);
    }
    if in_m1(&nx) {
        return Err(Error::Precondition(format!(
            "(γ-1)^{} α' lies in 𝔪^{dim}: α is outside the admissible set",
            orbit - 1
        )));
    }
    let nx = ring.sub(&ring.act(gamma, &nx), &nx);
    if !in_m1(&nx) {
        return Err(Error::Precondition(format!(
            "(γ-1)^{orbit} α' does not vanish in V"
        )));
    }

    let k = residue_field(ring);
    let gram = trace_gram(ring, 0, dim, n)?;
    if !gram.is_invertible(&k) {
        return Err(Error::violation(
            "the pairing p^{-n} Tr(xy) mod p on O_L / m^{p^n} is non-degenerate",
            format!("singular Gram matrix of size {dim}"),
        ));
    }
    let mut rows = Vec::with_capacity(orbit);
    let mut conj = alpha_prime.clone();
    for _ in 0..orbit {
        let v = residue_digits(ring, &conj, 0, dim);
        rows.push(gram.mul_vec(&k, &v));
        conj = ring.act(gamma, &conj);
    }
    let system = Matrix::from_rows(rows);
    let mut rhs = vec![k.zero(); orbit];
    rhs[0] = k.one();
    let c = system.solve_lex_min(&k, &rhs)?;
    let beta = ring.from_pi_digits(
        &c.iter().map(|&x| lift(x)).collect::<Vec<_>>(),
        ring.precision(),
    );

    // Σ_{j < p^{n-1}} Tr(α'^{γ^j} β) must have valuation exactly n.
    let mut s = BaseElement::ZERO;
    let mut conj = alpha_prime.clone();
    for _ in 0..orbit {
        s = ring.base_add(s, ring.trace_pairing(&conj, &beta));
        conj = ring.act(gamma, &conj);
    }
    let partial = ring.base_valuation(s, ring.precision());
    if partial != Some(n) {
        return Err(Error::violation(
            EQUALITY_STATEMENT,
            format!("Σ Tr(α'^σ β) has valuation {partial:?}, expected {n}"),
        ));
    }

    let alpha_valuation = ring.valuation_of(&resolvent(ring, alpha, chi)?);
    let beta_valuation = ring.valuation_of(&resolvent(ring, &beta, &chi.inverse())?);
    let total = alpha_valuation.add(&beta_valuation);
    let target = Valuation::Finite(BigRational::from_integer(BigInt::from(n + 1)));
    if total != target {
        return Err(Error::violation(
            EQUALITY_STATEMENT,
            format!(
                "valuation sum {total} for χ = ω^{}ψ_{}",
                chi.tame_exponent, chi.wild_exponent
            ),
        ));
    }
    let twisted = ring.valuation_of(&twisted_trace_sum(ring, alpha, &beta, chi)?);
    if twisted != target {
        return Err(Error::violation(
            EQUALITY_STATEMENT,
            format!("Σ Tr(α^γ β) χ(γ) has valuation {twisted}"),
        ));
    }
    Ok(DualBeta {
        beta,
        alpha_prime,
        alpha_omega_valuation: vl,
        alpha_valuation,
        beta_valuation,
        partial_sum_valuation: n,
    })
}

/// Outcome of the tame (`n = 0`) equality construction.
#[derive(Clone, Debug)]
pub struct TamePair {
    pub alpha: RingElement,
    pub beta: RingElement,
    pub valuation_sum: Valuation,
    /// Rank of the residues of `α^σ - α` (`σ ≠ 1`) in `𝔪_L / p`.
    pub difference_rank: usize,
    /// Number of candidates tried before a normal-basis generator certified.
    pub attempts: usize,
}

/// `O_L = O_K[G] α` iff the conjugates of `α` are a `k`-basis of `O_L / p`.
pub fn is_normal_basis_generator(ring: &TowerRing, alpha: &RingElement) -> bool {
    let k = residue_field(ring);
    let rows: Vec<Vec<Fq>> = ring
        .galois_group()
        .iter()
        .map(|g| {
            let x = ring.act(g.a, alpha);
            (0..ring.e())
                .map(|i| residue(ring, ring.coefficient(&x, i)))
                .collect()
        })
        .collect();
    Matrix::from_rows(rows).is_invertible(&k)
}

/// For `n = 0` and a nontrivial `χ`, finds a normal-basis generator `α` and `β`
/// with `v_p(⟨α|χ⟩) + v_p(⟨β|χ^{-1}⟩) = 1`. `ζ` is tried first, then random
/// integral elements.
pub fn tame_equality_search<R: Rng + ?Sized>(
    ring: &TowerRing,
    chi: &GaloisCharacter,
    rng: &mut R,
    max_attempts: usize,
) -> Result<TamePair> {
    if ring.n() != 0 {
        return Err(Error::Precondition(
            "the tame construction needs n = 0".into(),
        ));
    }
    if chi.is_trivial() {
        return Err(Error::Precondition("χ must be nontrivial".into()));
    }
    chi.check_ring(ring)?;
    let p = ring.p();
    let k = residue_field(ring);
    let dim = p as usize - 2;
    let group = ring.galois_group();
    let sigma0 = ring.delta_generator().a;
    let mut candidate = ring.zeta();
    for attempt in 1..=max_attempts.max(1) {
        if attempt > 1 {
            candidate = ring.random_integral(rng);
        }
        if !is_normal_basis_generator(ring, &candidate) {
            continue;
        }
        let alpha = candidate.clone();
        // H_ij = p^{-1} Tr(π^{i+j}), i, j = 1..p-2, on 𝔪/(p) × 𝔪/𝔪^{p-1}
        let gram = trace_gram(ring, 1, dim, 1)?;
        let diffs: Vec<(u64, Vec<Fq>)> = group
            .iter()
            .filter(|g| g.a != 1)
            .map(|g| {
                let d = ring.sub(&ring.act(g.a, &alpha), &alpha);
                (g.a, residue_digits(ring, &d, 1, dim))
            })
            .collect();
        let rank = Matrix::from_rows(diffs.iter().map(|(_, v)| v.clone()).collect()).rank(&k);
        if rank != dim {
            continue;
        }
        let rows: Vec<Vec<Fq>> = diffs.iter().map(|(_, v)| gram.mul_vec(&k, v)).collect();
        let rhs: Vec<Fq> = diffs
            .iter()
            .map(|(a, _)| if *a == sigma0 { k.one() } else { k.zero() })
            .collect();
        let coeffs = Matrix::from_rows(rows).solve_lex_min(&k, &rhs)?;
        let mut digits = vec![BaseElement::ZERO; ring.e()];
        for (i, c) in coeffs.iter().enumerate() {
            digits[i + 1] = lift(*c);
        }
        let beta = ring.from_pi_digits(&digits, ring.precision());
        let sum = valuation_sum(ring, &alpha, &beta, chi)?;
        let one = Valuation::Finite(BigRational::from_integer(BigInt::from(1)));
        if sum != one {
            return Err(Error::violation(
                "v(<a|chi>) + v(<b|chi^-1>) = 1 for n = 0",
                format!("valuation sum {sum}"),
            ));
        }
        return Ok(TamePair {
            alpha,
            beta,
            valuation_sum: sum,
            difference_rank: rank,
            attempts: attempt,
        });
    }
    Err(Error::PrecisionExhausted(format!(
        "no normal-basis generator found in {max_attempts} attempts"
    )))
}

/// For `n = 0`: a tame character `ω^k` with `v_p(⟨ζ|ω^k⟩) = 1/(p-1)`, below the
/// bound `1/2` that holds for wild characters. Returns `(k, valuation)`.
pub fn tame_small_valuation_example(ring: &TowerRing) -> Result<(u64, Valuation)> {
    if ring.n() != 0 {
        return Err(Error::Precondition("expects a level-0 ring".into()));
    }
    let p = ring.p();
    let target = Valuation::Finite(BigRational::new(BigInt::from(1), BigInt::from(p - 1)));
    for k in 1..p - 1 {
        let chi = GaloisCharacter::new(p, 0, k as i64, 0);
        let v = ring.valuation_of(&resolvent(ring, &ring.zeta(), &chi)?);
        if v == target {
            return Ok((k, v));
        }
    }
    Err(Error::violation(
        "some tame character has v(<zeta|omega>) = 1/(p-1)",
        format!("no exponent k in 1..{} attains {}", p - 1, target),
    ))
}

/// The element `ι(α)` for `ι: ζ ↦ ζ^{-1}`.
pub fn conjugate(ring: &TowerRing, alpha: &RingElement) -> RingElement {
    ring.act(ring.zeta_order() - 1, alpha)
}

/// Renders a valuation for reports.
pub fn render(v: &Valuation) -> String {
    match v {
        Valuation::Finite(q) => format_rational(q),
        other => other.render(),
    }
}

/// Galois elements of `Γ_n = {γ^j}`.
pub fn gamma_group(ring: &TowerRing) -> Vec<GaloisElement> {
    (0..ring.p().pow(ring.n()))
        .map(|j| GaloisElement::new(ring.gamma_power(j)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{rat, rat_int};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(p: u64, f: u32, n: u32) -> TowerRing {
        TowerRing::from_params(p, f, n).unwrap()
    }

    #[test]
    fn character_metadata() {
        let chi = GaloisCharacter::new(5, 2, 0, 1);
        assert_eq!(chi.order(), 25);
        assert_eq!(chi.conductor_exponent(), 3);
        assert_eq!(chi.parity(), Parity::Odd);
        let chi = GaloisCharacter::new(5, 2, 0, 5);
        assert_eq!(chi.order(), 5);
        assert_eq!(chi.conductor_exponent(), 2);
        assert_eq!(chi.parity(), Parity::Even);
        let chi = GaloisCharacter::new(5, 2, 2, 0);
        assert_eq!(chi.order(), 2);
        assert_eq!(chi.conductor_exponent(), 1);
        assert_eq!(GaloisCharacter::trivial(5, 2).conductor_exponent(), 0);
        assert_eq!(all_characters(5, 1).len(), 20);
        assert_eq!(characters_of_order_pn(5, 2).len(), 20);
    }

    #[test]
    fn character_is_multiplicative() {
        let r = ring(5, 1, 1);
        let chi = GaloisCharacter::new(5, 1, 3, 2);
        let mq = r.unit_modulus();
        for g in r.galois_group() {
            for h in r.galois_group().iter().step_by(3) {
                let lhs = chi.value_element(&r, mq.mul(g.a, h.a)).unwrap();
                let rhs = r.mul(
                    &chi.value_element(&r, g.a).unwrap(),
                    &chi.value_element(&r, h.a).unwrap(),
                );
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn trivial_character_gives_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = ring(3, 2, 1);
        let a = r.random_integral(&mut rng);
        let res = resolvent(&r, &a, &GaloisCharacter::trivial(3, 1)).unwrap();
        assert_eq!(res, r.from_base(r.trace_to_base(&a)));
    }

    #[test]
    fn resolvent_vanishes_on_lower_layer() {
        let r = ring(5, 1, 2);
        let sys = r.frobenius_uniformizer_system().unwrap();
        let chi = GaloisCharacter::wild(5, 2, 1);
        let res = resolvent_gamma(&r, &sys[1], &chi).unwrap();
        assert!(r.is_zero(&res));
    }

    #[test]
    fn uniformizer_resolvent_valuation() {
        let r = ring(5, 1, 1);
        let layer = r.layer_psi(1).unwrap();
        let alpha = r.psi_trace(&layer, &r.pi());
        let chi = GaloisCharacter::wild(5, 1, 1);
        let res = resolvent_gamma(&r, &alpha, &chi).unwrap();
        assert_eq!(r.valuation_of(&res), Valuation::Finite(rat_int(1)));
    }

    #[test]
    fn omega_components_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = ring(5, 1, 1);
        let a = r.random_integral(&mut rng);
        let total = (0..4).fold(r.zero(), |acc, k| r.add(&acc, &omega_component(&r, &a, k)));
        assert_eq!(total, r.scale_int(&a, 4));
        let sys = r.frobenius_uniformizer_system().unwrap();
        assert_eq!(omega_component(&r, &sys[1], 0), r.scale_int(&sys[1], 4));
    }

    #[test]
    fn lagrange_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = ring(3, 1, 1);
        let a = r.random_integral(&mut rng);
        let b = r.random_integral(&mut rng);
        assert!(lagrange_identity_check(&r, &a, &b).unwrap());
        assert!(lagrange_identity_check(&r, &r.zero(), &b).unwrap());
        assert!(lagrange_identity_check(&r, &a, &r.one()).unwrap());
    }

    #[test]
    fn dual_beta_small() {
        let r = ring(3, 1, 1);
        let sys = r.frobenius_uniformizer_system().unwrap();
        let chi = GaloisCharacter::wild(3, 1, 1);
        let d = find_dual_beta(&r, &sys[1], &chi).unwrap();
        assert_eq!(
            d.alpha_valuation.add(&d.beta_valuation),
            Valuation::Finite(rat_int(2))
        );
        let chi = GaloisCharacter::new(3, 1, 1, 1);
        let d = find_dual_beta(&r, &r.pi(), &chi).unwrap();
        assert_eq!(d.partial_sum_valuation, 1);
    }

    #[test]
    fn tame_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = ring(5, 1, 0);
        let chi = GaloisCharacter::new(5, 0, 1, 0);
        let pair = tame_equality_search(&r, &chi, &mut rng, 20).unwrap();
        assert_eq!(pair.valuation_sum, Valuation::Finite(rat_int(1)));
        assert_eq!(pair.difference_rank, 3);
        let (k, v) = tame_small_valuation_example(&r).unwrap();
        assert_eq!(v, Valuation::Finite(rat(1, 4)));
        assert_eq!(k, 3);
    }

    #[test]
    fn conjugation_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let r = ring(3, 1, 2);
        let chi = GaloisCharacter::wild(3, 2, 2);
        let a = r.random_integral(&mut rng);
        let lhs = r.valuation_of(&resolvent(&r, &a, &chi).unwrap());
        let rhs = r.valuation_of(&resolvent(&r, &conjugate(&r, &a), &chi.inverse()).unwrap());
        assert_eq!(lhs, rhs);
    }
}
