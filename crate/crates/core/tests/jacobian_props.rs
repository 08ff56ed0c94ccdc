use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use toric_hodge::divisor::ToricVariety;
use toric_hodge::fan;
use toric_hodge::jacobian::{dim_r, primitive_hodge_dims, sample_section, RankMode, Section, DEFAULT_PRIME};
use toric_hodge::pipeline::{fixture, FIXTURE_NAMES};

#[test]
fn modular_and_exact_ranks_agree() {
    let mut cases = 0;
    for (i, name) in FIXTURE_NAMES.iter().enumerate() {
        let fx = fixture(name).unwrap();
        let var = ToricVariety::new(fx.fan.clone()).unwrap();
        let l = fx.divisor.resolve(&var).unwrap();
        let beta = var.class_of(&l).unwrap();
        let f = sample_section(&var, &beta, 100 + i as u64).unwrap();
        let one = var.add_classes(&beta, &var.ray_class(0));
        let two = var.add_classes(&one, &var.ray_class(1));
        for (k, gamma) in [(1, one), (2, two)] {
            let modular = dim_r(&var, &f, &gamma, RankMode::Modular { prime: DEFAULT_PRIME }).unwrap();
            let small = dim_r(&var, &f, &gamma, RankMode::Modular { prime: 1_000_003 }).unwrap();
            let exact = dim_r(&var, &f, &gamma, RankMode::Exact).unwrap();
            let certified = dim_r(&var, &f, &gamma, RankMode::default()).unwrap();
            assert_eq!(modular, exact, "{name} k = {k}");
            assert_eq!(certified, exact, "{name} k = {k}");
            assert!(small >= exact, "{name} k = {k}");
            cases += 1;
        }
    }
    assert_eq!(cases, 20);
}

#[test]
fn fermat_hodge_numbers_are_symmetric() {
    let cases: [(fan::Fan, Vec<i64>); 3] = [
        (fan::projective_space(3).unwrap(), vec![4]),
        (fan::projective_space(3).unwrap(), vec![5]),
        (fan::weighted_projective(&[1, 1, 2, 2, 2, 2]).unwrap(), vec![6]),
    ];
    for (fan, class) in cases {
        let var = ToricVariety::new(fan).unwrap();
        let f = Section::fermat(&var, &var.class_from(&class).unwrap()).unwrap();
        let dims: Vec<usize> = primitive_hodge_dims(&var, &f, DEFAULT_PRIME).unwrap().iter().map(|h| h.dim).collect();
        let mut rev = dims.clone();
        rev.reverse();
        assert_eq!(dims, rev, "class {class:?}");
    }
}

#[test]
fn quintic_surface_hodge_numbers() {
    let var = ToricVariety::new(fan::projective_space(3).unwrap()).unwrap();
    let f = Section::fermat(&var, &var.class_from(&[5]).unwrap()).unwrap();
    let dims: Vec<usize> = primitive_hodge_dims(&var, &f, DEFAULT_PRIME).unwrap().iter().map(|h| h.dim).collect();
    assert_eq!(dims, vec![4, 44, 4]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rescaling_variables_preserves_dimensions(
        seed in 0u64..1000,
        t in prop::collection::vec((1i64..=7, 1i64..=5, any::<bool>()), 4),
        k in 0i64..=6,
    ) {
        let var = ToricVariety::new(fan::projective_space(3).unwrap()).unwrap();
        let f = sample_section(&var, &var.class_from(&[4]).unwrap(), seed).unwrap();
        let t: Vec<BigRational> = t
            .into_iter()
            .map(|(n, d, neg)| BigRational::new(BigInt::from(if neg { -n } else { n }), BigInt::from(d)))
            .collect();
        let g = f.rescale_variables(&t);
        let gamma = var.class_from(&[k]).unwrap();
        prop_assert_eq!(
            dim_r(&var, &f, &gamma, RankMode::default()).unwrap(),
            dim_r(&var, &g, &gamma, RankMode::default()).unwrap()
        );
    }
}
