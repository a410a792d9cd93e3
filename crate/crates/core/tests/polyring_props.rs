mod common;

use common::{mulmod, powmod, random_vec, rng};
use fhecore::modarith::{ntt_primes, Modulus};
use fhecore::ntt::{NttMode, NttPlan};
use fhecore::polyring::{
    apply_automorphism, apply_inverse_automorphism, elementwise_mod_add, elementwise_mod_mul,
    rotation_group_order, AutomorphismMap, Domain, RnsPoly,
};
use proptest::prelude::*;

fn poly(moduli: &[Modulus], n: usize, seed: u64, domain: Domain) -> RnsPoly {
    let mut r = rng(seed);
    let limbs = moduli
        .iter()
        .map(|m| random_vec(&mut r, n, m.value()))
        .collect();
    RnsPoly::new(moduli.to_vec(), limbs, domain).unwrap()
}

fn slot_perm(r: i64, n: usize) -> Vec<usize> {
    let two_n = 2 * n as u64;
    let ord = rotation_group_order(n) as i64;
    let g = powmod(5, r.rem_euclid(ord) as u64, two_n);
    (0..n as u64)
        .map(|x| ((g * (2 * x + 1) % two_n - 1) / 2) as usize)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_map_matches_formula(log in 1u32..=10, r in -40i64..40) {
        let n = 1usize << log;
        let map = AutomorphismMap::new(r, n).unwrap();
        prop_assert_eq!(map.permutation().to_vec(), slot_perm(r, n));
        prop_assert!(map.is_bijection());
        let inv = map.inverse_permutation();
        for x in 0..n {
            prop_assert_eq!(inv[map.permutation()[x]], x);
        }
    }

    #[test]
    fn maps_compose_additively(log in 1u32..=9, r1 in -30i64..30, r2 in -30i64..30, seed in any::<u64>()) {
        let n = 1usize << log;
        let ms = ntt_primes(28, 2 * n, 2).unwrap();
        for domain in [Domain::Evaluation, Domain::Coefficient] {
            let p = poly(&ms, n, seed, domain);
            let f = AutomorphismMap::new(r1, n).unwrap();
            let g = AutomorphismMap::new(r2, n).unwrap();
            let fg = AutomorphismMap::new(r1 + r2, n).unwrap();
            let twice = apply_automorphism(&apply_automorphism(&p, &f).unwrap(), &g).unwrap();
            prop_assert_eq!(&twice, &apply_automorphism(&p, &fg).unwrap());
            let back = apply_inverse_automorphism(&apply_automorphism(&p, &f).unwrap(), &f).unwrap();
            prop_assert_eq!(&back, &p);
        }
    }

    #[test]
    fn coefficient_map_commutes_with_ntt(log in 1u32..=8, r in -20i64..20, seed in any::<u64>()) {
        let n = 1usize << log;
        let m = ntt_primes(30, 2 * n, 1).unwrap()[0];
        let plan = NttPlan::balanced(n, m, NttMode::Negacyclic).unwrap();
        let map = AutomorphismMap::new(r, n).unwrap();
        let coeffs = poly(&[m], n, seed, Domain::Coefficient);
        let moved = apply_automorphism(&coeffs, &map).unwrap();
        let slots = RnsPoly::new(vec![m], vec![plan.forward(coeffs.limb(0)).unwrap()], Domain::Evaluation).unwrap();
        let moved_slots = apply_automorphism(&slots, &map).unwrap();
        prop_assert_eq!(plan.forward(moved.limb(0)).unwrap(), moved_slots.limb(0).to_vec());
    }

    #[test]
    fn slotwise_ops_match_oracle(log in 0u32..=8, seed in any::<u64>()) {
        let n = 1usize << log;
        let ms = ntt_primes(31, 2, 3).unwrap();
        let a = poly(&ms, n, seed, Domain::Evaluation);
        let b = poly(&ms, n, seed ^ 0xabc, Domain::Evaluation);
        let prod = elementwise_mod_mul(&a, &b).unwrap();
        let sum = elementwise_mod_add(&a, &b).unwrap();
        let diff = a.sub(&b).unwrap();
        for (i, m) in ms.iter().enumerate() {
            let q = m.value();
            for x in 0..n {
                let (u, v) = (a.limb(i)[x], b.limb(i)[x]);
                prop_assert_eq!(prod.limb(i)[x], mulmod(u, v, q));
                prop_assert_eq!(sum.limb(i)[x], (u + v) % q);
                prop_assert_eq!(diff.limb(i)[x], (u + q - v) % q);
            }
        }
        prop_assert_eq!(a.mul(&RnsPoly::one(n, ms.clone(), Domain::Evaluation)).unwrap(), a.clone());
        prop_assert_eq!(a.add(&RnsPoly::zero(n, ms.clone(), Domain::Evaluation)).unwrap(), a);
    }
}

#[test]
fn n8_rotation_by_one() {
    let map = AutomorphismMap::new(1, 8).unwrap();
    assert_eq!(map.permutation(), &[2, 7, 4, 1, 6, 3, 0, 5]);
    assert_eq!(rotation_group_order(8), 4);
    assert_eq!(rotation_group_order(1 << 16), 1 << 15);
    // r = 0 and r = order are the identity
    for r in [0, 4, -4] {
        assert_eq!(
            AutomorphismMap::new(r, 8).unwrap().permutation(),
            &[0, 1, 2, 3, 4, 5, 6, 7]
        );
    }
}

#[test]
fn coefficient_signs() {
    // N = 4, r = 1: g = 5, g^-1 = 5 mod 8; X -> X^5 = -X in Z[X]/(X^4+1)
    let map = AutomorphismMap::new(1, 4).unwrap();
    assert_eq!(map.coefficient_permutation(), &[0, 1, 2, 3]);
    assert_eq!(map.signs(), vec![1, -1, 1, -1]);
}

#[test]
fn shape_errors() {
    let ms = vec![Modulus::new(17).unwrap()];
    assert!(RnsPoly::new(ms.clone(), vec![], Domain::Evaluation).is_err());
    assert!(RnsPoly::new(ms.clone(), vec![vec![17]], Domain::Evaluation).is_err());
    let a = RnsPoly::zero(4, ms.clone(), Domain::Evaluation);
    let b = RnsPoly::zero(8, ms.clone(), Domain::Evaluation);
    assert!(a.mul(&b).is_err());
    assert!(a.add(&RnsPoly::zero(4, ms, Domain::Coefficient)).is_err());
    assert!(apply_automorphism(&a, &AutomorphismMap::new(1, 8).unwrap()).is_err());
    assert!(AutomorphismMap::new(1, 6).is_err());
}
