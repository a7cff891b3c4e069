use biharmonic_core::phase::{
    check_factorization, gamma_enumerate, mu_factored, mu_phase, phi, phi_factored, phi_general, phi_general_factored,
    ResonantTuple, MAX_FREQ,
};
use proptest::prelude::*;

#[test]
fn gamma_small_boxes() {
    let g = gamma_enumerate(0, 1);
    assert_eq!(g, vec![ResonantTuple::new(-1, 1, 0), ResonantTuple::new(1, -1, 0)]);
    assert!(g.iter().all(|t| t.n2 == 0));
    assert!(gamma_enumerate(0, 0).is_empty());
    for n in -8..=8 {
        let mut oracle = 0;
        for n1 in -8i64..=8 {
            for n3 in -8i64..=8 {
                let n2 = n1 + n3 - n;
                if n2.abs() <= 8 && n1 != n && n3 != n {
                    oracle += 1;
                }
            }
        }
        let got = gamma_enumerate(n, 8);
        assert_eq!(got.len(), oracle);
        assert!(got.windows(2).all(|w| (w[0].n1, w[0].n3) < (w[1].n1, w[1].n3)));
    }
}

#[test]
fn exhaustive_identities_to_32() {
    let rep = check_factorization(32).unwrap();
    assert!(rep.violations.is_empty(), "{:?}", &rep.violations[..rep.violations.len().min(3)]);
    assert!(rep.tuples_checked > 150_000);
    let json = rep.to_json();
    assert_eq!(json["range"], 32);
    assert!(json["violations"].as_array().unwrap().is_empty());
    assert!(check_factorization(65).is_err());
}

#[test]
fn non_resonance_conditions_agree_to_16() {
    // {n, n2} disjoint from {n1, n3} is the same as n1 != n and n3 != n.
    for n1 in -16i64..=16 {
        for n3 in -16i64..=16 {
            for n in -16i64..=16 {
                let t = ResonantTuple::new(n1, n3, n);
                let disjoint = ![t.n1, t.n3].contains(&t.n) && ![t.n1, t.n3].contains(&t.n2);
                assert_eq!(disjoint, t.in_gamma(), "{t:?}");
                assert_eq!(phi(&t).unwrap() != 0, t.in_gamma());
            }
        }
    }
}

#[test]
fn overflow_guard() {
    let edge = ResonantTuple::new(MAX_FREQ, MAX_FREQ, MAX_FREQ);
    assert_eq!(phi(&edge).unwrap(), 0);
    // Each entry fits, but 2 MAX^4 does not: reported, never wrapped.
    let big = ResonantTuple::new(MAX_FREQ, -MAX_FREQ, 0);
    assert!(phi(&big).is_err());
    assert!(phi(&ResonantTuple::new(MAX_FREQ, 1, 1)).is_ok());
    assert!(phi(&ResonantTuple::new(MAX_FREQ + 1, 0, 0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn factorizations_hold_for_large_frequencies(n1 in -18_000i64..18_000, n3 in -18_000i64..18_000, n in -18_000i64..18_000) {
        let t = ResonantTuple::new(n1, n3, n);
        let p = |x: i64| (x as i128).pow(4);
        let s = |x: i64| (x as i128).pow(2);
        let direct = p(t.n1) - p(t.n2) + p(t.n3) - p(t.n);
        prop_assert_eq!(phi(&t).unwrap() as i128, direct);
        prop_assert_eq!(phi_factored(&t).unwrap() as i128, direct);
        let mu = -s(t.n1) + s(t.n2) - s(t.n3) + s(t.n);
        prop_assert_eq!(mu_phase(&t).unwrap() as i128, mu);
        prop_assert_eq!(mu_factored(&t).unwrap() as i128, mu);
        prop_assert!(2 * direct.abs() >= mu.abs() * s(t.max_abs()));
        let small = ResonantTuple::new(n1 / 16, n3 / 16, n / 16);
        for (l, m) in [(1i64, 1i64), (-3, 2), (5, 0)] {
            prop_assert_eq!(phi_general(l, m, &small).unwrap(), phi_general_factored(l, m, &small).unwrap());
        }
    }
}
