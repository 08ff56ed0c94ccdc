use proptest::prelude::*;

use toric_hodge::divisor::{ToricVariety, WeilDivisor};
use toric_hodge::fan;
use toric_hodge::pipeline::{fixture, FIXTURE_NAMES};

fn varieties() -> Vec<ToricVariety> {
    FIXTURE_NAMES.iter().map(|n| ToricVariety::new(fixture(n).unwrap().fan).unwrap()).collect()
}

fn brute_force_points(var: &ToricVariety, d: &WeilDivisor, bound: i64) -> Vec<Vec<i64>> {
    let dim = var.dim();
    let mut out = Vec::new();
    let mut m = vec![-bound; dim];
    loop {
        let inside = var
            .fan()
            .rays()
            .iter()
            .zip(&d.coeffs)
            .all(|(u, a)| u.iter().zip(&m).map(|(x, y)| x * y).sum::<i64>() >= -a);
        if inside {
            out.push(m.clone());
        }
        let mut i = dim;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            if m[i] < bound {
                m[i] += 1;
                break;
            }
            m[i] = -bound;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn class_map_is_a_homomorphism(
        which in 0usize..FIXTURE_NAMES.len(),
        a in prop::collection::vec(-4i64..=4, 6),
        b in prop::collection::vec(-4i64..=4, 6),
        m in prop::collection::vec(-3i64..=3, 5),
    ) {
        let var = &varieties()[which];
        let n = var.ray_count();
        let da = WeilDivisor::new(a[..n].to_vec());
        let db = WeilDivisor::new(b[..n].to_vec());
        let (ca, cb) = (var.class_of(&da).unwrap(), var.class_of(&db).unwrap());
        prop_assert_eq!(var.class_of(&(&da + &db)).unwrap(), var.add_classes(&ca, &cb));
        prop_assert_eq!(var.class_of(&(&da - &db)).unwrap(), var.sub_classes(&ca, &cb));
        prop_assert_eq!(var.class_of(&da.scale(3)).unwrap(), var.scale_class(3, &ca));
        let principal = var.principal(&m[..var.dim()]);
        prop_assert_eq!(var.class_of(&principal).unwrap(), var.zero_class());
        let rep = var.representative(&ca).unwrap();
        prop_assert_eq!(var.class_of(&rep).unwrap(), ca);

        let moved = &da + &principal;
        prop_assert_eq!(var.is_nef(&moved).unwrap(), var.is_nef(&da).unwrap());
        prop_assert_eq!(var.is_ample(&moved).unwrap(), var.is_ample(&da).unwrap());
        prop_assert_eq!(
            var.cartier_data(&moved).unwrap().is_cartier(),
            var.cartier_data(&da).unwrap().is_cartier()
        );
    }

    #[test]
    fn enumeration_matches_box_scan(which in 0usize..FIXTURE_NAMES.len(), a in prop::collection::vec(-1i64..=2, 6)) {
        let var = &varieties()[which];
        prop_assume!(var.dim() <= 3);
        let d = WeilDivisor::new(a[..var.ray_count()].to_vec());
        let mut pts = var.polytope(&d).unwrap().lattice_points().unwrap().to_vec();
        pts.sort();
        prop_assert_eq!(pts, brute_force_points(var, &d, 8));
    }
}

#[test]
fn point_counts_agree_with_hilbert_functions() {
    let p3 = ToricVariety::new(fan::projective_space(3).unwrap()).unwrap();
    for k in 0..8i64 {
        let n = p3.polytope(&WeilDivisor::new(vec![k, 0, 0, 0])).unwrap().lattice_points().unwrap().len() as i64;
        assert_eq!(n, (k + 1) * (k + 2) * (k + 3) / 6);
    }
    let f2 = ToricVariety::new(fan::hirzebruch(2).unwrap()).unwrap();
    for b in 0..5i64 {
        for c in 0..5i64 {
            let expected: i64 = (0..=c).map(|j| b + 2 * j + 1).sum();
            let n = f2.polytope(&WeilDivisor::new(vec![0, 0, b, c])).unwrap().lattice_points().unwrap().len() as i64;
            assert_eq!(n, expected, "b = {b}, c = {c}");
        }
    }
}
