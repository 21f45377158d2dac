//! The ring of integers of `L = K(ζ)`, `ζ` a primitive `p^{n+1}`-th root of
//! unity, over an unramified base `K` of residue degree `f ∈ {1, 2}`, with
//! coefficients truncated modulo `p^N`.
//!
//! Elements are stored in the `ζ`-power basis `1, ζ, …, ζ^{e-1}` with
//! `e = p^n (p-1)`; each coordinate lies in `W = (Z/p^N)[Y]/(Y^f - c)`.
//! Subfields (the layers `K_m = K(ζ_{p^m})` and the `Z_p`-layers `Ψ_m`) are not
//! given rings of their own: their elements live in the top ring and are
//! recognised by Galois invariance.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::padic::{
    primitive_root_mod_prime_power, smallest_nonresidue, Modulus, PrimeProfile, Valuation,
};

/// An element of the unramified base ring `W`: `c[0] + c[1]·Y` (with `c[1] = 0` when `f = 1`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BaseElement {
    pub c: [u64; 2],
}

impl BaseElement {
    pub const ZERO: BaseElement = BaseElement { c: [0, 0] };

    pub fn scalar(v: u64) -> Self {
        BaseElement { c: [v, 0] }
    }

    pub fn is_zero(&self) -> bool {
        self.c == [0, 0]
    }
}

/// The Galois element `ζ ↦ ζ^a`, composed with the `b`-th power of Frobenius on `W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaloisElement {
    pub a: u64,
    pub b: u32,
}

impl GaloisElement {
    pub fn new(a: u64) -> Self {
        GaloisElement { a, b: 0 }
    }
}

/// An element of the tower ring, known modulo `p^precision`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    /// Flat coordinates: entry `i * f + j` is the `Y^j`-component of the `ζ^i` coefficient.
    pub coeffs: Vec<u64>,
    pub precision: u32,
}

/// A ring element divided by a power of `p`: represents `element / p^p_exponent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledElement {
    pub element: RingElement,
    pub p_exponent: u32,
}

/// Data describing `Ψ_m`, the fixed field of `Δ × G^{m+1}` (degree `p^m` over `K`,
/// totally ramified).
#[derive(Clone, Debug)]
pub struct PsiLayer {
    pub m: u32,
    /// The subgroup `Δ × G^{m+1}` as units modulo `p^{n+1}`.
    pub stabilizer: Vec<u64>,
    /// Generators of the stabilizer used for membership tests.
    pub generators: Vec<u64>,
}

/// Powers of `π_layer` and the residue span of the layer below, shared by
/// repeated uniformizer checks on one layer.
#[derive(Clone, Debug)]
pub struct LayerFixture {
    pub layer: u32,
    pub psi: PsiLayer,
    /// `π_layer^i` for `0 ≤ i < p^layer`.
    pub powers: Vec<RingElement>,
    lower_span: Vec<Vec<u64>>,
    lower_rank: usize,
}

#[derive(Clone, Debug)]
pub struct TowerRing {
    profile: PrimeProfile,
    md: Modulus,
    /// `p^{n+1}`, the order of `ζ`.
    q: u64,
    /// `p^n`.
    pn: u64,
    /// Ramification index `e = p^n (p-1)`, the degree in `ζ`.
    e: usize,
    f: usize,
    /// `Y^2 = nonresidue` when `f = 2`.
    nonresidue: u64,
    /// Teichmüller representatives of `1..p-1` modulo `p^{n+1}`.
    delta_q: Vec<u64>,
    /// Teichmüller representatives of `1..p-1` modulo `p^N`.
    delta_base: Vec<u64>,
    /// `γ = 1 + p`, a generator of `G^1`.
    gamma: u64,
    /// `dlog[(u-1)/p] = j` with `γ^j = u` for `u ≡ 1 mod p`.
    dlog: Vec<u32>,
    /// A primitive root mod `p^{n+1}` lifted to the Teichmüller character: generator of `Δ`.
    delta_generator: u64,
}

impl TowerRing {
    pub fn new(profile: PrimeProfile) -> Self {
        let p = profile.p;
        let n = profile.n;
        let q = p.pow(n + 1);
        let pn = p.pow(n);
        let mq = Modulus::new(p, n + 1);
        let md = Modulus::new(p, profile.precision);
        let f = profile.f as usize;
        let delta_q: Vec<u64> = (1..p).map(|r| mq.teichmuller(r)).collect();
        let delta_base: Vec<u64> = (1..p).map(|r| md.teichmuller(r)).collect();
        let gamma = (1 + p) % q;
        let mut dlog = vec![0u32; pn as usize];
        let mut u = 1u64;
        for j in 0..pn {
            dlog[((u - 1) / p) as usize] = j as u32;
            u = mq.mul(u, gamma);
        }
        let g = primitive_root_mod_prime_power(p, 1);
        TowerRing {
            profile,
            md,
            q,
            pn,
            e: profile.ramification_index() as usize,
            f,
            nonresidue: if f == 2 { smallest_nonresidue(p) } else { 0 },
            delta_q,
            delta_base,
            gamma,
            dlog,
            delta_generator: mq.teichmuller(g),
        }
    }

    pub fn from_params(p: u64, f: u32, n: u32) -> Result<Self> {
        Ok(Self::new(PrimeProfile::new(p, f, n)?))
    }

    pub fn profile(&self) -> &PrimeProfile {
        &self.profile
    }

    pub fn p(&self) -> u64 {
        self.profile.p
    }

    pub fn n(&self) -> u32 {
        self.profile.n
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn precision(&self) -> u32 {
        self.profile.precision
    }

    pub fn modulus(&self) -> &Modulus {
        &self.md
    }

    /// Ramification index of `L/K`, also the `ζ`-degree.
    pub fn e(&self) -> usize {
        self.e
    }

    /// Order `p^{n+1}` of `ζ`.
    pub fn zeta_order(&self) -> u64 {
        self.q
    }

    pub fn nonresidue(&self) -> u64 {
        self.nonresidue
    }

    pub fn gamma(&self) -> GaloisElement {
        GaloisElement::new(self.gamma)
    }

    pub fn delta_generator(&self) -> GaloisElement {
        GaloisElement::new(self.delta_generator)
    }

    /// Teichmüller representatives of `Δ` modulo `p^{n+1}`, indexed by `r - 1`.
    pub fn delta_elements(&self) -> &[u64] {
        &self.delta_q
    }

    /// Teichmüller lift of `r mod p` in the coefficient ring.
    pub fn teichmuller(&self, r: u64) -> u64 {
        if r % self.p() == 0 {
            0
        } else {
            self.delta_base[(r % self.p() - 1) as usize]
        }
    }

    /// Units modulo `p^{n+1}`.
    pub fn unit_modulus(&self) -> Modulus {
        Modulus::new(self.p(), self.n() + 1)
    }

    /// Splits `a` as `teich(r) · γ^j`; returns `(r, j)`.
    pub fn decompose_unit(&self, a: u64) -> Result<(u64, u64)> {
        let p = self.p();
        let a = a % self.q;
        if a % p == 0 {
            return Err(Error::InvalidParameter(format!(
                "{a} is not a unit modulo {}",
                self.q
            )));
        }
        let r = a % p;
        let mq = self.unit_modulus();
        let t_inv = mq.inv(self.delta_q[(r - 1) as usize]).expect("unit");
        let u = mq.mul(a, t_inv);
        Ok((r, self.dlog[((u - 1) / p) as usize] as u64))
    }

    /// `γ^j` as a unit modulo `p^{n+1}`.
    pub fn gamma_power(&self, j: u64) -> u64 {
        self.unit_modulus().pow(self.gamma, j)
    }

    /// `Gal(L/K)` as units modulo `p^{n+1}`, ordered by `(r, j)` in `teich(r)·γ^j`.
    pub fn galois_group(&self) -> Vec<GaloisElement> {
        let mq = self.unit_modulus();
        let mut out = Vec::with_capacity(self.e);
        for &t in &self.delta_q {
            let mut u = t;
            for _ in 0..self.pn {
                out.push(GaloisElement::new(u));
                u = mq.mul(u, self.gamma);
            }
        }
        out
    }

    /// `Gal(L/Q_p)`: the group of `L/K` together with the Frobenius powers.
    pub fn full_galois_group(&self) -> Vec<GaloisElement> {
        let base = self.galois_group();
        (0..self.f as u32)
            .flat_map(|b| base.iter().map(move |g| GaloisElement { a: g.a, b }))
            .collect()
    }

    pub fn compose(&self, g: GaloisElement, h: GaloisElement) -> GaloisElement {
        GaloisElement {
            a: self.unit_modulus().mul(g.a, h.a),
            b: (g.b + h.b) % self.f as u32,
        }
    }

    pub fn inverse(&self, g: GaloisElement) -> Result<GaloisElement> {
        let a = self.unit_modulus().inv(g.a % self.q).ok_or_else(|| {
            Error::InvalidParameter(format!("Galois parameter a = {} is not a unit", g.a))
        })?;
        Ok(GaloisElement {
            a,
            b: (self.f as u32 - g.b % self.f as u32) % self.f as u32,
        })
    }

    /// `G^m = Gal(L/K_m)`: all of `G` for `m = 0`, else units `≡ 1 mod p^m`.
    pub fn layer_group(&self, m: u32) -> Result<Vec<GaloisElement>> {
        let n = self.n();
        if m > n + 1 {
            return Err(Error::InvalidParameter(format!(
                "layer {m} outside 0..={}",
                n + 1
            )));
        }
        if m == 0 {
            return Ok(self.galois_group());
        }
        let step = self.p().pow(m);
        Ok((0..self.q / step)
            .map(|k| GaloisElement::new((1 + k * step) % self.q))
            .collect())
    }

    // ---- element construction ------------------------------------------------

    pub fn zero(&self) -> RingElement {
        RingElement {
            coeffs: vec![0; self.e * self.f],
            precision: self.precision(),
        }
    }

    pub fn from_base(&self, c: BaseElement) -> RingElement {
        let mut x = self.zero();
        x.coeffs[0] = c.c[0] % self.md.m;
        if self.f == 2 {
            x.coeffs[1] = c.c[1] % self.md.m;
        }
        x
    }

    pub fn from_int(&self, v: i64) -> RingElement {
        self.from_base(BaseElement::scalar(self.md.reduce_i64(v)))
    }

    pub fn one(&self) -> RingElement {
        self.from_int(1)
    }

    /// The generator `Y` of `W` over `Z_p` (`f = 2` only).
    pub fn y(&self) -> Result<RingElement> {
        if self.f != 2 {
            return Err(Error::InvalidParameter("Y exists only for f = 2".into()));
        }
        Ok(self.from_base(BaseElement { c: [0, 1] }))
    }

    /// `ζ^k` for any integer `k`.
    pub fn zeta_power(&self, k: i64) -> RingElement {
        let mut buf = vec![0u64; self.q as usize * self.f];
        let idx = k.rem_euclid(self.q as i64) as usize;
        buf[idx * self.f] = 1;
        self.reduce_redundant(buf, self.precision())
    }

    pub fn zeta(&self) -> RingElement {
        self.zeta_power(1)
    }

    /// `ζ_{p^k} = ζ^{p^{n+1-k}}`, a primitive `p^k`-th root of unity, `0 ≤ k ≤ n+1`.
    pub fn root_of_unity(&self, k: u32) -> Result<RingElement> {
        if k > self.n() + 1 {
            return Err(Error::InvalidParameter(format!(
                "no primitive p^{k}-th root of unity in a level-{} tower",
                self.n()
            )));
        }
        Ok(self.zeta_power(self.p().pow(self.n() + 1 - k) as i64))
    }

    /// The distinguished uniformizer `π = ζ - 1`.
    pub fn pi(&self) -> RingElement {
        self.sub(&self.zeta(), &self.one())
    }

    pub fn from_coeffs(&self, coeffs: Vec<u64>, precision: u32) -> Result<RingElement> {
        if coeffs.len() != self.e * self.f {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                self.e * self.f,
                coeffs.len()
            )));
        }
        if precision == 0 || precision > self.precision() {
            return Err(Error::InvalidParameter(format!(
                "element precision {precision} outside 1..={}",
                self.precision()
            )));
        }
        Ok(RingElement {
            coeffs: coeffs.into_iter().map(|c| c % self.md.m).collect(),
            precision,
        })
    }

    /// A uniformly random element of `O_L` modulo `p^N`.
    pub fn random_integral<R: Rng + ?Sized>(&self, rng: &mut R) -> RingElement {
        RingElement {
            coeffs: (0..self.e * self.f)
                .map(|_| rng.gen_range(0..self.md.m))
                .collect(),
            precision: self.precision(),
        }
    }

    pub fn random_base<R: Rng + ?Sized>(&self, rng: &mut R) -> BaseElement {
        let mut c = [rng.gen_range(0..self.md.m), 0];
        if self.f == 2 {
            c[1] = rng.gen_range(0..self.md.m);
        }
        BaseElement { c }
    }

    pub fn random_base_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> BaseElement {
        loop {
            let c = self.random_base(rng);
            if c.c[0] % self.p() != 0 || c.c[1] % self.p() != 0 {
                return c;
            }
        }
    }

    // ---- base ring arithmetic ------------------------------------------------

    pub fn base_add(&self, a: BaseElement, b: BaseElement) -> BaseElement {
        BaseElement {
            c: [self.md.add(a.c[0], b.c[0]), self.md.add(a.c[1], b.c[1])],
        }
    }

    pub fn base_sub(&self, a: BaseElement, b: BaseElement) -> BaseElement {
        BaseElement {
            c: [self.md.sub(a.c[0], b.c[0]), self.md.sub(a.c[1], b.c[1])],
        }
    }

    pub fn base_mul(&self, a: BaseElement, b: BaseElement) -> BaseElement {
        let md = &self.md;
        if self.f == 1 {
            return BaseElement::scalar(md.mul(a.c[0], b.c[0]));
        }
        let yy = md.mul(md.mul(a.c[1], b.c[1]), self.nonresidue);
        BaseElement {
            c: [
                md.add(md.mul(a.c[0], b.c[0]), yy),
                md.add(md.mul(a.c[0], b.c[1]), md.mul(a.c[1], b.c[0])),
            ],
        }
    }

    pub fn base_frobenius(&self, a: BaseElement) -> BaseElement {
        BaseElement {
            c: [a.c[0], self.md.neg(a.c[1])],
        }
    }

    /// `v_p` of a base element known modulo `p^precision`; `None` if it vanishes there.
    pub fn base_valuation(&self, a: BaseElement, precision: u32) -> Option<u32> {
        let mp = self.p().pow(precision);
        let v: Vec<u32> =
            a.c.iter()
                .filter(|&&c| c % mp != 0)
                .map(|&c| Modulus::new(self.p(), precision).valuation(c % mp))
                .collect();
        v.into_iter().min()
    }

    pub fn base_inverse(&self, a: BaseElement) -> Result<BaseElement> {
        let md = &self.md;
        if self.f == 1 {
            return md
                .inv(a.c[0])
                .map(BaseElement::scalar)
                .ok_or_else(|| Error::NotInvertible(format!("{} in W", a.c[0])));
        }
        // (x + yY)^{-1} = (x - yY) / (x^2 - c y^2)
        let norm = md.sub(
            md.mul(a.c[0], a.c[0]),
            md.mul(self.nonresidue, md.mul(a.c[1], a.c[1])),
        );
        let ni = md
            .inv(norm)
            .ok_or_else(|| Error::NotInvertible(format!("{:?} in W", a.c)))?;
        Ok(BaseElement {
            c: [md.mul(a.c[0], ni), md.mul(md.neg(a.c[1]), ni)],
        })
    }

    pub fn coefficient(&self, x: &RingElement, i: usize) -> BaseElement {
        let mut c = [x.coeffs[i * self.f], 0];
        if self.f == 2 {
            c[1] = x.coeffs[i * self.f + 1];
        }
        BaseElement { c }
    }

    // ---- ring arithmetic -----------------------------------------------------

    pub fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        RingElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| self.md.add(x, y))
                .collect(),
            precision: a.precision.min(b.precision),
        }
    }

    pub fn sub(&self, a: &RingElement, b: &RingElement) -> RingElement {
        RingElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| self.md.sub(x, y))
                .collect(),
            precision: a.precision.min(b.precision),
        }
    }

    pub fn neg(&self, a: &RingElement) -> RingElement {
        RingElement {
            coeffs: a.coeffs.iter().map(|&x| self.md.neg(x)).collect(),
            precision: a.precision,
        }
    }

    pub fn scale_int(&self, a: &RingElement, k: i64) -> RingElement {
        let k = self.md.reduce_i64(k);
        RingElement {
            coeffs: a.coeffs.iter().map(|&x| self.md.mul(x, k)).collect(),
            precision: a.precision,
        }
    }

    pub fn scale_base(&self, a: &RingElement, c: BaseElement) -> RingElement {
        if self.f == 1 {
            return self.scale_int(a, c.c[0] as i64);
        }
        let mut out = self.zero();
        out.precision = a.precision;
        for i in 0..self.e {
            let v = self.base_mul(self.coefficient(a, i), c);
            out.coeffs[2 * i] = v.c[0];
            out.coeffs[2 * i + 1] = v.c[1];
        }
        out
    }

    pub fn is_zero(&self, a: &RingElement) -> bool {
        let mp = self.p().pow(a.precision);
        a.coeffs.iter().all(|&c| c % mp == 0)
    }

    /// Equality modulo the smaller of the two precisions.
    pub fn eq_mod_precision(&self, a: &RingElement, b: &RingElement) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let precision = a.precision.min(b.precision);
        let e = self.e;
        let f = self.f;
        let m = self.md.m;
        let nz = |x: &RingElement| -> Vec<usize> {
            (0..e)
                .filter(|&i| x.coeffs[i * f..(i + 1) * f].iter().any(|&c| c != 0))
                .collect()
        };
        let ia = nz(a);
        let ib = nz(b);
        let len = 2 * e - 1;
        // Rows of products that may be accumulated in u128 before a reduction pass.
        let sq = ((m - 1) as u128).pow(2).max(1);
        let rows_per_reduce = ((u128::MAX / sq) / 2).min(usize::MAX as u128) as usize;
        let rows_per_reduce = rows_per_reduce.max(1);
        let mut buf = vec![0u64; (self.q as usize).max(len) * f];
        if f == 1 {
            let mut acc = vec![0u128; len];
            let mut rows = 0;
            for &i in &ia {
                let x = a.coeffs[i] as u128;
                for &j in &ib {
                    acc[i + j] += x * b.coeffs[j] as u128;
                }
                rows += 1;
                if rows == rows_per_reduce {
                    acc.iter_mut().for_each(|v| *v %= m as u128);
                    rows = 0;
                }
            }
            for (k, v) in acc.into_iter().enumerate() {
                buf[k] = (v % m as u128) as u64;
            }
        } else {
            let mut acc0 = vec![0u128; len];
            let mut acc1 = vec![0u128; len];
            let mut accy = vec![0u128; len];
            let mut rows = 0;
            for &i in &ia {
                let x0 = a.coeffs[2 * i] as u128;
                let x1 = a.coeffs[2 * i + 1] as u128;
                for &j in &ib {
                    let y0 = b.coeffs[2 * j] as u128;
                    let y1 = b.coeffs[2 * j + 1] as u128;
                    acc0[i + j] += x0 * y0;
                    accy[i + j] += x1 * y1;
                    acc1[i + j] += x0 * y1 + x1 * y0;
                }
                rows += 1;
                if rows == rows_per_reduce {
                    for acc in [&mut acc0, &mut acc1, &mut accy] {
                        acc.iter_mut().for_each(|v| *v %= m as u128);
                    }
                    rows = 0;
                }
            }
            for k in 0..len {
                let yy = self.md.mul((accy[k] % m as u128) as u64, self.nonresidue);
                buf[2 * k] = self.md.add((acc0[k] % m as u128) as u64, yy);
                buf[2 * k + 1] = (acc1[k] % m as u128) as u64;
            }
        }
        self.reduce_redundant(buf, precision)
    }

    pub fn square(&self, a: &RingElement) -> RingElement {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &RingElement, mut k: u64) -> RingElement {
        let mut acc = self.one();
        acc.precision = a.precision;
        let mut base = a.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.square(&base);
            }
        }
        acc
    }

    /// `x · ζ^k`.
    pub fn mul_zeta_power(&self, x: &RingElement, k: i64) -> RingElement {
        let mut buf = vec![0u64; self.q as usize * self.f];
        let shift = k.rem_euclid(self.q as i64) as u64;
        self.accumulate_twisted(&mut buf, x, 1, shift, BaseElement::scalar(1));
        self.reduce_redundant(buf, x.precision)
    }

    /// `x · π` computed as `xζ - x`.
    pub fn mul_pi(&self, x: &RingElement) -> RingElement {
        self.sub(&self.mul_zeta_power(x, 1), x)
    }

    pub fn pi_power(&self, k: u64) -> RingElement {
        (0..k).fold(self.one(), |acc, _| self.mul_pi(&acc))
    }

    /// Inverse of a unit by Newton iteration from its residue-field inverse.
    pub fn unit_inverse(&self, x: &RingElement) -> Result<RingElement> {
        let digits = self.pi_digits(x);
        let d0 = digits[0];
        if self.base_valuation(d0, 1).is_some_and(|v| v > 0) || self.base_valuation(d0, 1).is_none()
        {
            return Err(Error::NotInvertible("element is not a unit".into()));
        }
        // x ≡ d0 mod π; start from the inverse of d0 and double the precision.
        let mut y = self.from_base(self.base_inverse(d0)?);
        y.precision = x.precision;
        let two = self.from_int(2);
        // Each step doubles the π-adic precision; e·N steps' worth is more than enough.
        let target = (self.e as u64) * x.precision as u64;
        let mut reached = 1u64;
        while reached < target {
            let t = self.sub(&two, &self.mul(x, &y));
            y = self.mul(&y, &t);
            reached *= 2;
        }
        Ok(y)
    }

    /// Writes the `ζ`-redundant buffer (indices `< 2e-1` or `< p^{n+1}`) back to
    /// the reduced basis using `ζ^{p^{n+1}} = 1` and `Φ_{p^{n+1}}(ζ) = 0`.
    fn reduce_redundant(&self, mut buf: Vec<u64>, precision: u32) -> RingElement {
        let f = self.f;
        let q = self.q as usize;
        let e = self.e;
        let pn = self.pn as usize;
        let p = self.p() as usize;
        let total = buf.len() / f;
        for idx in q..total {
            for c in 0..f {
                let v = buf[idx * f + c];
                buf[(idx - q) * f + c] = self.md.add(buf[(idx - q) * f + c], v);
            }
        }
        for idx in e..q.min(total) {
            let r = idx - e;
            for c in 0..f {
                let v = buf[idx * f + c];
                if v == 0 {
                    continue;
                }
                for i in 0..p - 1 {
                    let t = (r + i * pn) * f + c;
                    buf[t] = self.md.sub(buf[t], v);
                }
            }
        }
        buf.truncate(e * f);
        buf.resize(e * f, 0);
        RingElement {
            coeffs: buf,
            precision,
        }
    }

    /// Adds `scalar · ζ^{shift} · x^{(a,0)}` into a redundant buffer of length `p^{n+1}`.
    pub(crate) fn accumulate_twisted(
        &self,
        buf: &mut [u64],
        x: &RingElement,
        a: u64,
        shift: u64,
        scalar: BaseElement,
    ) {
        let f = self.f;
        let q = self.q;
        let trivial = scalar == BaseElement::scalar(1);
        for i in 0..self.e {
            let c = self.coefficient(x, i);
            if c.is_zero() {
                continue;
            }
            let c = if trivial { c } else { self.base_mul(c, scalar) };
            let idx = ((a as u128 * i as u128 + shift as u128) % q as u128) as usize;
            buf[idx * f] = self.md.add(buf[idx * f], c.c[0]);
            if f == 2 {
                buf[idx * f + 1] = self.md.add(buf[idx * f + 1], c.c[1]);
            }
        }
    }

    pub(crate) fn new_buffer(&self) -> Vec<u64> {
        vec![0u64; self.q as usize * self.f]
    }

    pub(crate) fn finish_buffer(&self, buf: Vec<u64>, precision: u32) -> RingElement {
        self.reduce_redundant(buf, precision)
    }

    // ---- Galois action and traces ---------------------------------------------

    pub fn galois_act(&self, g: GaloisElement, x: &RingElement) -> Result<RingElement> {
        if g.a % self.p() == 0 {
            return Err(Error::InvalidParameter(format!(
                "Galois parameter a = {} is not prime to p",
                g.a
            )));
        }
        let mut buf = self.new_buffer();
        self.accumulate_twisted(&mut buf, x, g.a % self.q, 0, BaseElement::scalar(1));
        let mut out = self.reduce_redundant(buf, x.precision);
        if self.f == 2 && g.b % 2 == 1 {
            for i in 0..self.e {
                out.coeffs[2 * i + 1] = self.md.neg(out.coeffs[2 * i + 1]);
            }
        }
        Ok(out)
    }

    /// Galois action by `ζ ↦ ζ^a`, for a unit `a` already known to be valid.
    pub fn act(&self, a: u64, x: &RingElement) -> RingElement {
        self.galois_act(GaloisElement::new(a), x)
            .expect("unit Galois parameter")
    }

    pub fn is_fixed_by(&self, g: GaloisElement, x: &RingElement) -> Result<bool> {
        Ok(self.eq_mod_precision(&self.galois_act(g, x)?, x))
    }

    /// `Tr_{L/K}(ζ^i)` for `0 ≤ i < e`.
    fn trace_of_basis(&self, i: usize) -> i64 {
        if i == 0 {
            self.e as i64
        } else if i as u64 % self.pn == 0 {
            -(self.pn as i64)
        } else {
            0
        }
    }

    /// `Tr_{L/K}(x)` as an element of `W`, in `O(e)` operations.
    pub fn trace_to_base(&self, x: &RingElement) -> BaseElement {
        let mut acc = BaseElement::ZERO;
        for k in 0..self.p() as usize - 1 {
            let i = k * self.pn as usize;
            let t = self.md.reduce_i64(self.trace_of_basis(i));
            let c = self.coefficient(x, i);
            acc = self.base_add(acc, self.base_mul(c, BaseElement::scalar(t)));
        }
        acc
    }

    /// `Tr_{L/K}(xy)` without forming the product.
    pub fn trace_pairing(&self, x: &RingElement, y: &RingElement) -> BaseElement {
        let pn = self.pn as usize;
        let q = self.q as usize;
        let e = self.e;
        let mut acc = BaseElement::ZERO;
        // Only indices s = i + j ≡ 0 mod p^n (reduced mod p^{n+1}) have nonzero trace.
        for i in 0..e {
            let ci = self.coefficient(x, i);
            if ci.is_zero() {
                continue;
            }
            let mut j = (pn - i % pn) % pn;
            while j < e {
                let cj = self.coefficient(y, j);
                if !cj.is_zero() {
                    let s = (i + j) % q;
                    let t = if s == 0 { e as i64 } else { -(pn as i64) };
                    let v = self.base_mul(
                        self.base_mul(ci, cj),
                        BaseElement::scalar(self.md.reduce_i64(t)),
                    );
                    acc = self.base_add(acc, v);
                }
                j += pn;
            }
        }
        acc
    }

    /// `Tr_{L/K_m}(x)`, the sum over `Gal(L/K_m) = G^m`.
    pub fn trace_to_layer(&self, x: &RingElement, m: u32) -> Result<RingElement> {
        if m == 0 {
            return Ok(self
                .from_base(self.trace_to_base(x))
                .with_precision(x.precision));
        }
        let group = self.layer_group(m)?;
        Ok(self.sum_over(&group, x))
    }

    /// `Tr_{K_{i+1}/K_i}(x)` for `x ∈ K_{i+1}`: the sum over coset representatives
    /// of `G^i / G^{i+1}`.
    pub fn relative_trace(&self, x: &RingElement, i: u32) -> Result<RingElement> {
        if i > self.n() {
            return Err(Error::InvalidParameter(format!(
                "relative trace step {i} outside 0..={}",
                self.n()
            )));
        }
        Ok(self.sum_over(&self.coset_representatives(i + 1, i)?, x))
    }

    /// Representatives of `G^to / G^from` (`to < from`).
    pub fn coset_representatives(&self, from: u32, to: u32) -> Result<Vec<GaloisElement>> {
        if to >= from || from > self.n() + 1 {
            return Err(Error::InvalidParameter(format!(
                "bad coset request G^{to}/G^{from}"
            )));
        }
        let p = self.p();
        let mf = Modulus::new(p, from);
        if to == 0 {
            return Ok((1..mf.m)
                .filter(|a| a % p != 0)
                .map(GaloisElement::new)
                .collect());
        }
        let step = p.pow(to);
        Ok((0..p.pow(from - to))
            .map(|k| GaloisElement::new((1 + k * step) % self.q))
            .collect())
    }

    pub fn sum_over(&self, group: &[GaloisElement], x: &RingElement) -> RingElement {
        let mut buf = self.new_buffer();
        for g in group {
            self.accumulate_twisted(&mut buf, x, g.a % self.q, 0, BaseElement::scalar(1));
        }
        let mut out = self.reduce_redundant(buf, x.precision);
        if self.f == 2 && group.iter().any(|g| g.b % 2 == 1) {
            // Frobenius components: recompute honestly.
            out = group
                .iter()
                .map(|&g| self.galois_act(g, x).expect("group element"))
                .fold(self.zero().with_precision(x.precision), |acc, y| {
                    self.add(&acc, &y)
                });
        }
        out
    }

    /// Norm `N_{L/K}(x)` as a ring element (a constant).
    pub fn norm_to_base(&self, x: &RingElement) -> RingElement {
        self.galois_group()
            .iter()
            .fold(self.one().with_precision(x.precision), |acc, &g| {
                self.mul(&acc, &self.act(g.a, x))
            })
    }

    // ---- valuation --------------------------------------------------------------

    /// Coordinates in the `π`-power basis: `x = Σ_{j<e} d_j π^j` with `d_j ∈ W`.
    pub fn pi_digits(&self, x: &RingElement) -> Vec<BaseElement> {
        let f = self.f;
        let e = self.e;
        let mut a = x.coeffs.clone();
        // Taylor shift X → X + 1 of the ζ-polynomial.
        for i in 0..e {
            for j in (i..e - 1).rev() {
                for c in 0..f {
                    a[j * f + c] = self.md.add(a[j * f + c], a[(j + 1) * f + c]);
                }
            }
        }
        (0..e)
            .map(|j| {
                let mut c = [a[j * f], 0];
                if f == 2 {
                    c[1] = a[j * f + 1];
                }
                BaseElement { c }
            })
            .collect()
    }

    /// Inverse of [`pi_digits`](Self::pi_digits).
    pub fn from_pi_digits(&self, digits: &[BaseElement], precision: u32) -> RingElement {
        let f = self.f;
        let e = self.e;
        let mut a = vec![0u64; e * f];
        for (j, d) in digits.iter().enumerate().take(e) {
            a[j * f] = d.c[0] % self.md.m;
            if f == 2 {
                a[j * f + 1] = d.c[1] % self.md.m;
            }
        }
        for i in 0..e {
            for j in (i..e - 1).rev() {
                for c in 0..f {
                    a[j * f + c] = self.md.sub(a[j * f + c], a[(j + 1) * f + c]);
                }
            }
        }
        RingElement {
            coeffs: a,
            precision,
        }
    }

    /// `v_L(x)` in units of the uniformizer of `L` (so `v_L(π) = 1`), or `None`
    /// when `x` vanishes to working precision.
    pub fn valuation_l(&self, x: &RingElement) -> Option<u64> {
        let e = self.e as u64;
        self.pi_digits(x)
            .iter()
            .enumerate()
            .filter_map(|(j, d)| {
                self.base_valuation(*d, x.precision)
                    .map(|v| e * v as u64 + j as u64)
            })
            .min()
    }

    /// Exact `v_p(x)`, or a lower bound when `x` is zero to working precision.
    ///
    /// Distinct `π`-digits contribute distinct valuations modulo `1/e`, so the
    /// valuation is the minimum over the digits.
    pub fn valuation_of(&self, x: &RingElement) -> Valuation {
        if self.is_zero(x) {
            return Valuation::AtLeast(BigRational::from_integer(BigInt::from(x.precision)));
        }
        // Constants need no change of basis.
        if x.coeffs[self.f..].iter().all(|&c| c == 0) {
            let v = self
                .base_valuation(self.coefficient(x, 0), x.precision)
                .expect("nonzero");
            return Valuation::Finite(BigRational::from_integer(BigInt::from(v)));
        }
        let vl = self.valuation_l(x).expect("nonzero element has a digit");
        Valuation::Finite(BigRational::new(
            BigInt::from(vl),
            BigInt::from(self.e as u64),
        ))
    }

    pub fn scaled_valuation(&self, x: &ScaledElement) -> Valuation {
        self.valuation_of(&x.element)
            .shift(&BigRational::from_integer(-BigInt::from(x.p_exponent)))
    }

    /// Divides by `p^k`, failing if some coordinate is not divisible.
    pub fn div_p_power(&self, x: &RingElement, k: u32) -> Result<RingElement> {
        if k == 0 {
            return Ok(x.clone());
        }
        if k >= x.precision {
            return Err(Error::PrecisionExhausted(format!(
                "cannot divide by p^{k} an element known modulo p^{}",
                x.precision
            )));
        }
        let pk = self.p().pow(k);
        let mp = self.p().pow(x.precision);
        let mut coeffs = Vec::with_capacity(x.coeffs.len());
        for &c in &x.coeffs {
            let c = c % mp;
            if c % pk != 0 {
                return Err(Error::Precondition(format!(
                    "element is not divisible by p^{k}"
                )));
            }
            coeffs.push(c / pk);
        }
        Ok(RingElement {
            coeffs,
            precision: x.precision - k,
        })
    }

    /// True when `x ∈ p^k O_L` (to working precision).
    pub fn divisible_by_p_power(&self, x: &RingElement, k: u32) -> bool {
        let pk = self.p().pow(k.min(x.precision));
        x.coeffs.iter().all(|&c| c % pk == 0)
    }

    /// Reduces `x` to the canonical representative modulo `p^precision`.
    pub fn normalize(&self, x: &RingElement) -> RingElement {
        let mp = self.p().pow(x.precision);
        RingElement {
            coeffs: x.coeffs.iter().map(|&c| c % mp).collect(),
            precision: x.precision,
        }
    }

    pub fn normalize_scaled(&self, x: &ScaledElement) -> ScaledElement {
        let mut s = x.clone();
        while s.p_exponent > 0
            && s.element.precision > 1
            && self.divisible_by_p_power(&s.element, 1)
        {
            s.element = self
                .div_p_power(&s.element, 1)
                .expect("checked divisibility");
            s.p_exponent -= 1;
        }
        s.element = self.normalize(&s.element);
        s
    }

    // ---- layers ----------------------------------------------------------------

    /// `Ψ_m`: fixed field of `Δ × G^{m+1}`, `0 ≤ m ≤ n`.
    pub fn layer_psi(&self, m: u32) -> Result<PsiLayer> {
        if m > self.n() {
            return Err(Error::InvalidParameter(format!(
                "Ψ-layer {m} outside 0..={}",
                self.n()
            )));
        }
        let mq = self.unit_modulus();
        let gm = self.gamma_power(self.p().pow(m));
        let count = self.p().pow(self.n() - m);
        let mut stabilizer = Vec::with_capacity(self.delta_q.len() * count as usize);
        for &t in &self.delta_q {
            let mut u = t;
            for _ in 0..count {
                stabilizer.push(u);
                u = mq.mul(u, gm);
            }
        }
        Ok(PsiLayer {
            m,
            stabilizer,
            generators: vec![self.delta_generator, gm],
        })
    }

    pub fn psi_contains(&self, layer: &PsiLayer, x: &RingElement) -> bool {
        layer
            .generators
            .iter()
            .all(|&a| self.eq_mod_precision(&self.act(a, x), x))
    }

    /// `Tr_{L/Ψ_m}(x)`.
    pub fn psi_trace(&self, layer: &PsiLayer, x: &RingElement) -> RingElement {
        let group: Vec<GaloisElement> = layer
            .stabilizer
            .iter()
            .map(|&a| GaloisElement::new(a))
            .collect();
        self.sum_over(&group, x)
    }

    /// The uniformizers `π_m = Tr_{K_{m+1}/Ψ_m}(ζ_{p^{m+1}} - 1)` of `Ψ_m`,
    /// `m = 0..=n`, certified to satisfy `π_{m+1}^p ≡ π_m mod p`.
    pub fn frobenius_uniformizer_system(&self) -> Result<Vec<RingElement>> {
        let n = self.n();
        let p = self.p();
        let mut out = Vec::with_capacity(n as usize + 1);
        for m in 0..=n {
            let step = p.pow(n - m);
            let mut buf = self.new_buffer();
            for &t in &self.delta_q {
                let idx = ((t as u128 * step as u128) % self.q as u128) as usize;
                buf[idx * self.f] = self.md.add(buf[idx * self.f], 1);
            }
            let sum = self.reduce_redundant(buf, self.precision());
            out.push(self.sub(&sum, &self.from_int(p as i64 - 1)));
        }
        for m in 0..n as usize {
            let lhs = self.pow(&out[m + 1], p);
            if !self.divisible_by_p_power(&self.sub(&lhs, &out[m]), 1) {
                return Err(Error::violation(
                    "pi_{m+1}^p = pi_m mod p",
                    format!("congruence fails at layer {}", m + 1),
                ));
            }
        }
        for (m, x) in out.iter().enumerate() {
            let expected = Valuation::Finite(BigRational::new(
                BigInt::from(1),
                BigInt::from(p.pow(m as u32)),
            ));
            if self.valuation_of(x) != expected {
                return Err(Error::violation(
                    "pi_m is a uniformizer of Psi_m",
                    format!(
                        "π_{m} has valuation {} instead of {expected}",
                        self.valuation_of(x)
                    ),
                ));
            }
        }
        Ok(out)
    }

    /// Precomputes the data shared by congruence checks and random uniformizers
    /// of `Ψ_layer`, `1 ≤ layer ≤ n`.
    pub fn layer_fixture(&self, layer: u32, system: &[RingElement]) -> Result<LayerFixture> {
        if layer == 0 || layer > self.n() {
            return Err(Error::Precondition(format!(
                "layer {layer} must lie in 1..={}",
                self.n()
            )));
        }
        let p = self.p();
        let pi = &system[layer as usize];
        let mut powers = vec![self.one()];
        for _ in 1..p.pow(layer) {
            powers.push(self.mul(powers.last().expect("nonempty"), pi));
        }
        // The residue image of O_{Ψ_{layer-1}} in O_L / p is spanned over F_p by
        // π_{layer-1}^i and Y π_{layer-1}^i for i < p^{layer-1}.
        let lower = &system[layer as usize - 1];
        let mut span: Vec<Vec<u64>> = Vec::new();
        let mut power = self.one();
        for _ in 0..p.pow(layer - 1) {
            span.push(power.coeffs.iter().map(|c| c % p).collect());
            if self.f == 2 {
                let yp = self.scale_base(&power, BaseElement { c: [0, 1] });
                span.push(yp.coeffs.iter().map(|c| c % p).collect());
            }
            power = self.mul(&power, lower);
        }
        let lower_rank = crate::linalg::rank_mod_p(&span, p);
        Ok(LayerFixture {
            layer,
            psi: self.layer_psi(layer)?,
            powers,
            lower_span: span,
            lower_rank,
        })
    }

    /// Checks that `x^p ∈ p O_L + O_{Ψ_{layer-1}}` for a uniformizer `x` of `Ψ_layer`.
    pub fn frobenius_congruence_check(
        &self,
        x: &RingElement,
        layer: u32,
        system: &[RingElement],
    ) -> Result<bool> {
        self.frobenius_congruence_check_with(x, &self.layer_fixture(layer, system)?)
    }

    /// As [`TowerRing::frobenius_congruence_check`], with precomputed layer data.
    /// Membership of `x^p mod p` in the residue span is decided by a rank comparison.
    pub fn frobenius_congruence_check_with(
        &self,
        x: &RingElement,
        fixture: &LayerFixture,
    ) -> Result<bool> {
        let layer = fixture.layer;
        if !self.psi_contains(&fixture.psi, x) {
            return Err(Error::Precondition(format!("element is not in Ψ_{layer}")));
        }
        let expected = BigRational::new(BigInt::from(1), BigInt::from(self.p().pow(layer)));
        if self.valuation_of(x) != Valuation::Finite(expected) {
            return Err(Error::Precondition(format!(
                "element is not a uniformizer of Ψ_{layer} (valuation {})",
                self.valuation_of(x)
            )));
        }
        let p = self.p();
        let target: Vec<u64> = self.pow(x, p).coeffs.iter().map(|c| c % p).collect();
        let mut span = fixture.lower_span.clone();
        span.push(target);
        Ok(crate::linalg::rank_mod_p(&span, p) == fixture.lower_rank)
    }

    /// A random uniformizer of `Ψ_layer`: `p·w_0 + w_1 π_layer + Σ_{i≥2} w_i π_layer^i`
    /// with `w_1` a unit.
    pub fn random_psi_uniformizer<R: Rng + ?Sized>(
        &self,
        fixture: &LayerFixture,
        rng: &mut R,
    ) -> RingElement {
        let p = self.p();
        let mut acc = self.scale_int(&self.from_base(self.random_base(rng)), p as i64);
        for (i, power) in fixture.powers.iter().enumerate().skip(1) {
            let w = if i == 1 {
                self.random_base_unit(rng)
            } else {
                self.random_base(rng)
            };
            acc = self.add(&acc, &self.scale_base(power, w));
        }
        acc
    }

    // ---- serialization ---------------------------------------------------------

    /// Canonical JSON: `{"p","f","n","N","coeffs":[[..],..]}` with decimal strings.
    pub fn to_json(&self, x: &RingElement) -> Value {
        let x = self.normalize(x);
        let coeffs: Vec<Vec<String>> = (0..self.e)
            .map(|i| {
                x.coeffs[i * self.f..(i + 1) * self.f]
                    .iter()
                    .map(|c| c.to_string())
                    .collect()
            })
            .collect();
        let mut v = json!({
            "p": self.p(),
            "f": self.f,
            "n": self.n(),
            "N": self.precision(),
            "coeffs": coeffs,
        });
        if x.precision < self.precision() {
            v["precision"] = json!(x.precision);
        }
        v
    }

    /// Parses the canonical JSON form; the ring parameters must match this ring.
    /// Coefficients may be negative decimal strings; a coefficient list shorter
    /// than `e` is padded with zeros.
    pub fn from_json(&self, v: &Value) -> Result<RingElement> {
        let get = |k: &str| -> Result<u64> {
            v.get(k)
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse(format!("missing integer field {k:?}")))
        };
        let (p, f, n, big_n) = (get("p")?, get("f")?, get("n")?, get("N")?);
        if p != self.p()
            || f as usize != self.f
            || n != self.n() as u64
            || big_n != self.precision() as u64
        {
            return Err(Error::Parse(format!(
                "element ring (p={p}, f={f}, n={n}, N={big_n}) differs from ({}, {}, {}, {})",
                self.p(),
                self.f,
                self.n(),
                self.precision()
            )));
        }
        let precision = match v.get("precision") {
            Some(x) => x
                .as_u64()
                .ok_or_else(|| Error::Parse("precision must be an integer".into()))?
                as u32,
            None => self.precision(),
        };
        let rows = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing array field \"coeffs\"".into()))?;
        if rows.len() > self.e {
            return Err(Error::Parse(format!(
                "{} coefficients exceed the degree {}",
                rows.len(),
                self.e
            )));
        }
        let mut coeffs = vec![0u64; self.e * self.f];
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Parse(format!("coefficient {i} is not an array")))?;
            if row.len() != self.f {
                return Err(Error::Parse(format!(
                    "coefficient {i} has {} components, expected {}",
                    row.len(),
                    self.f
                )));
            }
            for (j, c) in row.iter().enumerate() {
                let s = match c {
                    Value::String(s) => s.clone(),
                    Value::Number(num) => num.to_string(),
                    _ => return Err(Error::Parse(format!("bad coefficient at ({i}, {j})"))),
                };
                let b: BigInt = s
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad coefficient {s:?}: {e}")))?;
                coeffs[i * self.f + j] = self.md.reduce_bigint(&b);
            }
        }
        self.from_coeffs(coeffs, precision)
    }
}

impl RingElement {
    pub fn with_precision(mut self, precision: u32) -> Self {
        self.precision = self.precision.min(precision);
        self
    }
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
    fn zeta_has_exact_order() {
        for (p, n) in [(3, 0), (3, 2), (5, 1)] {
            let r = ring(p, 1, n);
            let z = r.zeta();
            let q = r.zeta_order();
            assert_eq!(r.pow(&z, q), r.one());
            assert_ne!(r.pow(&z, q / p), r.one());
        }
    }

    #[test]
    fn y_squares_to_nonresidue() {
        let r = ring(5, 2, 1);
        let y = r.y().unwrap();
        assert_eq!(r.square(&y), r.from_int(2));
    }

    #[test]
    fn basic_valuations() {
        for (p, f, n) in [(3, 1, 1), (5, 2, 1), (3, 2, 2)] {
            let r = ring(p, f, n);
            assert_eq!(
                r.valuation_of(&r.from_int(p as i64)),
                Valuation::Finite(rat_int(1))
            );
            assert_eq!(
                r.valuation_of(&r.pi()),
                Valuation::Finite(rat(1, r.e() as i64))
            );
            assert!(matches!(r.valuation_of(&r.zero()), Valuation::AtLeast(_)));
            assert_eq!(r.valuation_of(&r.one()), Valuation::Finite(rat_int(0)));
        }
    }

    #[test]
    fn cyclotomic_value_at_higher_root() {
        // Φ_5(ζ_25) = 1 + ζ_25 + ... + ζ_25^4, while Φ_25(ζ_25) = 0
        let r = ring(5, 1, 1);
        let z = r.zeta();
        let phi5 = (0..5).fold(r.zero(), |acc, i| r.add(&acc, &r.pow(&z, i)));
        assert_eq!(r.valuation_of(&phi5), Valuation::Finite(rat(1, 5)));
        let z5 = r.pow(&z, 5);
        let phi25 = (0..5).fold(r.zero(), |acc, i| r.add(&acc, &r.pow(&z5, i)));
        assert!(r.is_zero(&phi25));
    }

    #[test]
    fn orbit_sum_of_zeta_p() {
        let r = ring(5, 1, 0);
        assert_eq!(r.trace_to_layer(&r.zeta(), 0).unwrap(), r.from_int(-1));
        let r = ring(5, 1, 1);
        assert_eq!(r.trace_to_layer(&r.zeta(), 1).unwrap(), r.zero());
        assert_eq!(r.trace_to_layer(&r.zeta(), 2).unwrap(), r.zeta());
    }

    #[test]
    fn galois_inversion() {
        let r = ring(3, 1, 2);
        let inv = GaloisElement::new(r.zeta_order() - 1);
        assert_eq!(
            r.galois_act(inv, &r.zeta()).unwrap(),
            r.zeta_power(r.zeta_order() as i64 - 1)
        );
        assert!(r.galois_act(GaloisElement::new(3), &r.zeta()).is_err());
    }

    #[test]
    fn fast_trace_matches_orbit_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, f, n) in [(3, 1, 1), (3, 2, 1), (5, 1, 1), (3, 1, 2)] {
            let r = ring(p, f, n);
            let x = r.random_integral(&mut rng);
            let y = r.random_integral(&mut rng);
            let slow = r.sum_over(&r.galois_group(), &x);
            assert_eq!(slow, r.from_base(r.trace_to_base(&x)));
            assert_eq!(r.trace_pairing(&x, &y), r.trace_to_base(&r.mul(&x, &y)));
        }
    }

    #[test]
    fn pi_digits_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = ring(5, 2, 1);
        let x = r.random_integral(&mut rng);
        assert_eq!(r.from_pi_digits(&r.pi_digits(&x), x.precision), x);
        let d = r.pi_digits(&r.pi_power(3));
        assert_eq!(d[3], BaseElement::scalar(1));
        assert!(d.iter().enumerate().all(|(j, c)| j == 3 || c.is_zero()));
    }

    #[test]
    fn inverse_of_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = ring(3, 2, 1);
        let u = r.add(&r.one(), &r.mul_pi(&r.random_integral(&mut rng)));
        let v = r.unit_inverse(&u).unwrap();
        assert_eq!(r.mul(&u, &v), r.one());
        assert!(r.unit_inverse(&r.pi()).is_err());
    }

    #[test]
    fn norm_of_pi_has_valuation_one() {
        for (p, n) in [(3, 1), (5, 1), (3, 2)] {
            let r = ring(p, 1, n);
            let nm = r.norm_to_base(&r.pi());
            assert_eq!(r.valuation_of(&nm), Valuation::Finite(rat_int(1)));
        }
    }

    #[test]
    fn uniformizer_system_valuations() {
        let r = ring(3, 1, 2);
        let sys = r.frobenius_uniformizer_system().unwrap();
        assert_eq!(sys.len(), 3);
        assert_eq!(sys[0], r.from_int(-3));
        for (m, x) in sys.iter().enumerate() {
            let layer = r.layer_psi(m as u32).unwrap();
            assert!(r.psi_contains(&layer, x));
        }
    }

    #[test]
    fn psi_projection_of_pi() {
        let r = ring(5, 1, 1);
        let layer = r.layer_psi(1).unwrap();
        let t = r.psi_trace(&layer, &r.pi());
        assert!(r.psi_contains(&layer, &t));
        assert_eq!(r.valuation_of(&t), Valuation::Finite(rat(1, 5)));
        assert!(!r.psi_contains(&layer, &r.zeta()));
        let base = r.layer_psi(0).unwrap();
        let t0 = r.psi_trace(&base, &r.zeta());
        assert!(t0.coeffs[1..].iter().all(|&c| c == 0));
    }

    #[test]
    fn congruence_check_rejects_non_uniformizer() {
        let r = ring(3, 1, 2);
        let sys = r.frobenius_uniformizer_system().unwrap();
        assert!(r.frobenius_congruence_check(&sys[2], 2, &sys).unwrap());
        let sq = r.square(&sys[2]);
        assert!(matches!(
            r.frobenius_congruence_check(&sq, 2, &sys),
            Err(Error::Precondition(_))
        ));
        let fixture = r.layer_fixture(2, &sys).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let u = r.random_psi_uniformizer(&fixture, &mut rng);
            assert!(r.frobenius_congruence_check_with(&u, &fixture).unwrap());
        }
        assert!(r.layer_fixture(0, &sys).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = ring(3, 2, 1);
        let x = r.random_integral(&mut rng);
        let j = r.to_json(&x);
        assert_eq!(r.from_json(&j).unwrap(), x);
        let bad = json!({"p": 5, "f": 2, "n": 1, "N": 7, "coeffs": []});
        assert!(r.from_json(&bad).is_err());
    }

    #[test]
    fn group_has_expected_order() {
        let r = ring(5, 2, 1);
        assert_eq!(r.galois_group().len(), 20);
        assert_eq!(r.full_galois_group().len(), 40);
        let g = GaloisElement { a: 7, b: 1 };
        let h = r.inverse(g).unwrap();
        assert_eq!(r.compose(g, h), GaloisElement::new(1));
        for g in r.galois_group() {
            let (rr, j) = r.decompose_unit(g.a).unwrap();
            let back = r
                .unit_modulus()
                .mul(r.delta_elements()[rr as usize - 1], r.gamma_power(j));
            assert_eq!(back, g.a);
        }
    }
}
