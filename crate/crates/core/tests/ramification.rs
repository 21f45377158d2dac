use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use padic_resolvent::padic::{rat, rat_int};
use padic_resolvent::ramification::{
    different_exponent, empirical_different_exponent, herbrand_psi, lower_numbering_empirical,
    predicted_lower_index, trace_ideal_image, trace_one_check, HerbrandFunction,
};
use padic_resolvent::tower::GaloisElement;
use padic_resolvent::{Error, TowerRing, Valuation};

#[test]
fn herbrand_values() {
    assert_eq!(herbrand_psi(5, 2, &rat_int(0)).unwrap(), rat_int(0));
    assert_eq!(herbrand_psi(5, 2, &rat_int(2)).unwrap(), rat_int(24));
    assert_eq!(herbrand_psi(5, 2, &rat(3, 2)).unwrap(), rat_int(14));
    assert!(herbrand_psi(5, 2, &rat_int(4)).is_err());
    for p in [3u64, 5, 7] {
        for j in 0..=3u32 {
            assert_eq!(
                herbrand_psi(p, 3, &rat_int(j as i64)).unwrap(),
                rat_int(p.pow(j) as i64 - 1)
            );
        }
    }
}

#[test]
fn herbrand_phi_inverts_psi() {
    let h = HerbrandFunction::cyclotomic(3, 2);
    for (num, den) in [(0, 1), (1, 3), (1, 1), (5, 4), (2, 1), (17, 6)] {
        let u = rat(num, den);
        assert_eq!(h.phi(&h.psi(&u).unwrap()).unwrap(), u);
    }
}

#[test]
fn different_exponents() {
    assert_eq!(different_exponent(5, 1, 1).unwrap(), 20);
    assert_eq!(different_exponent(3, 2, 2).unwrap(), 18);
    assert!(different_exponent(3, 2, 0).is_err());
    assert!(different_exponent(3, 2, 3).is_err());
    let ring = TowerRing::from_params(3, 1, 1).unwrap();
    assert_eq!(empirical_different_exponent(&ring, 1).unwrap(), 6);
    let ring = TowerRing::from_params(5, 2, 2).unwrap();
    for i in 1..=2 {
        assert_eq!(
            empirical_different_exponent(&ring, i).unwrap(),
            different_exponent(5, 2, i).unwrap()
        );
    }
}

#[test]
fn trace_ideals() {
    let ring = TowerRing::from_params(5, 1, 1).unwrap();
    for k in [0, 2, 4] {
        assert_eq!(
            trace_ideal_image(&ring, 1, k).unwrap(),
            Valuation::Finite(rat_int(1))
        );
    }
    assert!(matches!(
        trace_ideal_image(&ring, 1, 5),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn lower_numbering_small_cases() {
    let ring = TowerRing::from_params(3, 1, 1).unwrap();
    let filt = lower_numbering_empirical(&ring, &ring.pi()).unwrap();
    assert_eq!(filt.lower_jumps(), vec![0, 2]);
    for &(a, i) in &filt.lower_indices {
        assert_eq!(i, predicted_lower_index(&ring, a));
    }

    let ring = TowerRing::from_params(5, 2, 2).unwrap();
    let filt = lower_numbering_empirical(&ring, &ring.pi()).unwrap();
    // tame elements sit at index 1 only
    let hist = filt.index_histogram();
    assert_eq!(hist[&1], ring.e() - ring.p().pow(2) as usize);
    // σ ∈ G^n: v_L(σπ - π) - 1 = p^n - 1
    for &(a, i) in &filt.lower_indices {
        if a % 25 == 1 {
            assert_eq!(i - 1, 24);
        }
    }
    assert!(lower_numbering_empirical(&ring, &ring.mul(&ring.pi(), &ring.pi())).is_err());
}

#[test]
fn trace_one_examples() {
    let ring = TowerRing::from_params(5, 1, 1).unwrap();
    let zeta = ring.zeta();
    assert!(trace_one_check(&ring, GaloisElement::new(1), &zeta, &ring.one()).unwrap());
    assert!(trace_one_check(&ring, GaloisElement::new(6), &zeta, &ring.one()).unwrap());
    assert!(matches!(
        trace_one_check(&ring, GaloisElement::new(2), &zeta, &ring.one()),
        Err(Error::Precondition(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_one_random(seed in any::<u64>(), cfg in 0usize..4) {
        let (p, n) = [(3, 1), (3, 2), (5, 1), (5, 2)][cfg];
        let ring = TowerRing::from_params(p, 1, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = ring.random_integral(&mut rng);
        let beta = ring.random_integral(&mut rng);
        let sigma = GaloisElement::new(1 + p.pow(n));
        prop_assert!(trace_one_check(&ring, sigma, &alpha, &beta).unwrap());
    }
}
