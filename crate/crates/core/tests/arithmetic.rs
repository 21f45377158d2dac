use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use padic_resolvent::padic::{cyclotomic_poly, rat, rational_valuation, IntPoly};
use padic_resolvent::tower::GaloisElement;
use padic_resolvent::{Error, TowerRing, Valuation};

fn fin(num: i64, den: i64) -> Valuation {
    Valuation::Finite(rat(num, den))
}

#[test]
fn cyclotomic_polynomials() {
    assert_eq!(
        cyclotomic_poly(5, 1).unwrap(),
        IntPoly::from_i64(&[1, 1, 1, 1, 1])
    );
    assert_eq!(
        cyclotomic_poly(3, 2).unwrap(),
        IntPoly::from_i64(&[1, 0, 0, 1, 0, 0, 1])
    );
    let phi25 = cyclotomic_poly(5, 2).unwrap();
    assert_eq!(phi25.degree(), 20);
    assert_eq!(phi25.nonzero_terms(), 5);
    assert!(phi25
        .coeffs
        .iter()
        .all(|c| *c == BigInt::from(0) || *c == BigInt::from(1)));
    assert!(phi25.is_monic());
    assert!(cyclotomic_poly(5, 0).is_err());
    assert!(cyclotomic_poly(4, 1).is_err());
    assert!(cyclotomic_poly(9, 1).is_err());
}

#[test]
fn rational_valuations() {
    assert_eq!(rational_valuation(&rat(25, 1), 5), fin(2, 1));
    assert_eq!(rational_valuation(&rat(3, 5), 5), fin(-1, 1));
    assert_eq!(rational_valuation(&rat(0, 1), 5), Valuation::Infinite);
}

#[test]
fn galois_action_and_traces() {
    let ring = TowerRing::from_params(5, 1, 1).unwrap();
    let zeta = ring.zeta();
    assert_eq!(ring.galois_act(GaloisElement::new(1), &zeta).unwrap(), zeta);
    let inv = ring
        .galois_act(GaloisElement::new(ring.zeta_order() - 1), &zeta)
        .unwrap();
    assert!(ring.eq_mod_precision(&inv, &ring.zeta_power(ring.zeta_order() as i64 - 1)));
    assert!(matches!(
        ring.galois_act(GaloisElement::new(5), &zeta),
        Err(Error::InvalidParameter(_) | Error::Precondition(_))
    ));
    // ζ_25 has trace 0 down to Q_5(ζ_5)
    assert!(ring.is_zero(&ring.trace_to_layer(&zeta, 1).unwrap()));
    assert_eq!(ring.trace_to_layer(&zeta, 2).unwrap(), zeta);
    assert!(ring.trace_to_layer(&zeta, 3).is_err());

    let level0 = TowerRing::from_params(5, 1, 0).unwrap();
    let t = level0.trace_to_layer(&level0.zeta(), 0).unwrap();
    assert!(level0.eq_mod_precision(&t, &level0.from_int(-1)));
    let orbit = level0.sum_over(&level0.galois_group(), &level0.zeta());
    assert!(level0.eq_mod_precision(&orbit, &level0.from_int(-1)));
}

#[test]
fn basic_valuations() {
    for (p, f, n) in [(3, 1, 0), (3, 2, 2), (5, 1, 1), (7, 2, 1)] {
        let ring = TowerRing::from_params(p, f, n).unwrap();
        assert_eq!(ring.valuation_of(&ring.from_int(p as i64)), fin(1, 1));
        let pi = ring.sub(&ring.zeta(), &ring.one());
        assert_eq!(ring.valuation_of(&pi), fin(1, (p.pow(n) * (p - 1)) as i64));
        assert_eq!(
            ring.valuation_of(&ring.zero()),
            Valuation::AtLeast(rat(ring.precision() as i64, 1))
        );
    }
}

#[test]
fn frobenius_system_valuations_and_layers() {
    for (p, f, n) in [(3, 1, 2), (5, 2, 1), (5, 1, 2)] {
        let ring = TowerRing::from_params(p, f, n).unwrap();
        let system = ring.frobenius_uniformizer_system().unwrap();
        assert_eq!(system.len(), n as usize + 1);
        for (m, pi_m) in system.iter().enumerate() {
            assert_eq!(ring.valuation_of(pi_m), fin(1, p.pow(m as u32) as i64));
            let layer = ring.layer_psi(m as u32).unwrap();
            assert!(ring.psi_contains(&layer, pi_m));
            assert!(!ring.psi_contains(&layer, &ring.zeta()));
        }
        let top = ring.layer_psi(n).unwrap();
        let t = ring.psi_trace(&top, &ring.sub(&ring.zeta(), &ring.one()));
        assert!(ring.psi_contains(&top, &t));
        assert_eq!(ring.valuation_of(&t), fin(1, p.pow(n) as i64));

        let bottom = ring.layer_psi(0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let proj = ring.psi_trace(&bottom, &ring.random_integral(&mut rng));
        assert!(ring.eq_mod_precision(&proj, &ring.from_base(ring.coefficient(&proj, 0))));
        assert!(ring.layer_psi(n + 1).is_err());
    }
}

#[test]
fn congruence_for_twisted_uniformizers() {
    let ring = TowerRing::from_params(3, 2, 2).unwrap();
    let system = ring.frobenius_uniformizer_system().unwrap();
    for layer in 1..=2u32 {
        let pi = &system[layer as usize];
        assert!(ring.frobenius_congruence_check(pi, layer, &system).unwrap());
        // (1 + π) π: a principal unit times the distinguished uniformizer
        let twisted = ring.mul(&ring.add(&ring.one(), pi), pi);
        assert!(ring
            .frobenius_congruence_check(&twisted, layer, &system)
            .unwrap());
        let square = ring.mul(pi, pi);
        assert!(matches!(
            ring.frobenius_congruence_check(&square, layer, &system),
            Err(Error::Precondition(_))
        ));
    }
}

#[test]
fn json_roundtrip() {
    let ring = TowerRing::from_params(5, 2, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = ring.random_integral(&mut rng);
    let back = ring.from_json(&ring.to_json(&x)).unwrap();
    assert!(ring.eq_mod_precision(&x, &back));
}

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-2000i64..2000, 1i64..2000)
        .prop_filter("nonzero", |(a, _)| *a != 0)
        .prop_map(|(a, b)| rat(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_valuation_is_additive(x in small_rational(), y in small_rational(), pi in 0usize..3) {
        let p = [3u64, 5, 7][pi];
        let lhs = rational_valuation(&(&x * &y), p);
        let rhs = rational_valuation(&x, p).add(&rational_valuation(&y, p));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn cyclotomic_identities(pi in 0usize..3, k in 1u32..4) {
        let p = [3u64, 5, 7][pi];
        let phi = cyclotomic_poly(p, k).unwrap();
        prop_assert_eq!(phi.eval(&BigInt::from(1)), BigInt::from(p));
        prop_assert_eq!(phi.substitute_power(p as usize), cyclotomic_poly(p, k + 1).unwrap());
        prop_assert!(phi.shift_by_one().is_eisenstein(p));
    }

    #[test]
    fn tower_valuation_is_additive(seed in any::<u64>(), cfg in 0usize..3) {
        let (p, f, n) = [(3, 1, 1), (3, 2, 1), (5, 1, 1)][cfg];
        let ring = TowerRing::from_params(p, f, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ring.mul(&ring.random_integral(&mut rng), &ring.pi_power(rng.gen_range(0..4)));
        let y = ring.mul(&ring.random_integral(&mut rng), &ring.pi_power(rng.gen_range(0..4)));
        let vx = ring.valuation_of(&x);
        let vy = ring.valuation_of(&y);
        let vxy = ring.valuation_of(&ring.mul(&x, &y));
        if let (Valuation::Finite(a), Valuation::Finite(b)) = (&vx, &vy) {
            if let Valuation::Finite(c) = &vxy {
                prop_assert_eq!(c, &(a + b));
            }
        }
    }

    #[test]
    fn galois_action_is_a_ring_map(seed in any::<u64>()) {
        let ring = TowerRing::from_params(3, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ring.random_integral(&mut rng);
        let y = ring.random_integral(&mut rng);
        for g in ring.full_galois_group() {
            let lhs = ring.galois_act(g, &ring.mul(&x, &y)).unwrap();
            let rhs = ring.mul(&ring.galois_act(g, &x).unwrap(), &ring.galois_act(g, &y).unwrap());
            prop_assert!(ring.eq_mod_precision(&lhs, &rhs));
        }
    }
}
