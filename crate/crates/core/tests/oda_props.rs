use std::collections::BTreeSet;

use proptest::prelude::*;

use toric_hodge::cox::{monomials_of_divisor, multiply};
use toric_hodge::divisor::{ToricVariety, WeilDivisor};
use toric_hodge::oda::{check_pair, check_pair_divisors};
use toric_hodge::pipeline::{fixture, FIXTURE_NAMES};

fn variety(which: usize) -> ToricVariety {
    ToricVariety::new(fixture(FIXTURE_NAMES[which]).unwrap().fan).unwrap()
}

/// Surjectivity of `S_a (x) S_b -> S_{a+b}` by multiplying monomials.
fn monomial_oracle(var: &ToricVariety, a: &WeilDivisor, b: &WeilDivisor) -> bool {
    let ma = monomials_of_divisor(var, a).unwrap();
    let mb = monomials_of_divisor(var, b).unwrap();
    let products: BTreeSet<_> = ma.iter().flat_map(|x| mb.iter().map(move |y| multiply(x, y))).collect();
    monomials_of_divisor(var, &(a + b)).unwrap().iter().all(|m| products.contains(m))
}

fn nonneg(n: usize, max: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(0i64..=max, n)
}

/// Truncates to the ray count, with smaller entries on the larger fans.
fn divisor(var: &ToricVariety, v: &[i64]) -> WeilDivisor {
    let n = var.ray_count();
    let cap = if n > 4 { 1 } else { 2 };
    WeilDivisor::new(v[..n].iter().map(|&x| x.min(cap)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_matches_monomial_products(which in 0usize..FIXTURE_NAMES.len(), a in nonneg(6, 2), b in nonneg(6, 2)) {
        let var = variety(which);
        let (da, db) = (divisor(&var, &a), divisor(&var, &b));
        let r = check_pair_divisors(&var, &da, &db).unwrap();
        prop_assert_eq!(r.surjective, monomial_oracle(&var, &da, &db));
        prop_assert!(r.verify_witnesses(&var).unwrap());
        prop_assert_eq!(r.target_points, r.decomposition_witness.len() + r.undecomposable.len());
    }

    #[test]
    fn pair_check_is_symmetric(which in 0usize..FIXTURE_NAMES.len(), a in nonneg(6, 3), b in nonneg(6, 3)) {
        let var = variety(which);
        let ca = var.class_of(&divisor(&var, &a)).unwrap();
        let cb = var.class_of(&divisor(&var, &b)).unwrap();
        let ab = check_pair(&var, &ca, &cb).unwrap();
        let ba = check_pair(&var, &cb, &ca).unwrap();
        prop_assert_eq!(ab.surjective, ba.surjective);
        prop_assert_eq!(ab.target_points, ba.target_points);
        prop_assert_eq!(ab.undecomposable.len(), ba.undecomposable.len());
    }

    #[test]
    fn smooth_fixtures_are_oda_in_small_degrees(which in 0usize..FIXTURE_NAMES.len(), a in nonneg(6, 2), b in nonneg(6, 2)) {
        let var = variety(which);
        prop_assume!(var.fan().is_smooth());
        let (da, db) = (divisor(&var, &a), divisor(&var, &b));
        prop_assume!(var.is_ample(&da).unwrap() && var.is_nef(&db).unwrap());
        prop_assert!(check_pair_divisors(&var, &da, &db).unwrap().surjective);
    }
}
