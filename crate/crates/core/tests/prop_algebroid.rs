mod common;

use common::{point, poly, poly_vec};
use nambu_core::algebroid::{
    anchor_morphism_residual, exact_forms_residual, leibniz_residual, locality_defect, module_rules_residual, random_element, singular_points,
    BracketKind, Convention,
};
use nambu_core::fields::ScalarField;
use nambu_core::gallery::{canonical_structure, gallery, GalleryParams};
use nambu_core::nambu::NambuStructure;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const P: BracketKind = BracketKind::P(Convention::Scalar);

/// FI-passing structures with r ≥ 3.
fn structures() -> Vec<NambuStructure> {
    let scaled = |n: usize, h: &str| canonical_structure(n, 3).unwrap().scaled(&ScalarField::parse(h).unwrap()).unwrap();
    vec![
        canonical_structure(3, 3).unwrap(),
        canonical_structure(4, 3).unwrap(),
        scaled(3, "x1"),
        scaled(3, "x1^2 + 1"),
        scaled(4, "x2 x4"),
        gallery("heisenberg", &GalleryParams::new()).unwrap().structure,
    ]
}

fn structure() -> impl Strategy<Value = NambuStructure> {
    proptest::sample::select(structures())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn brackets_are_local((s, x) in structure().prop_flat_map(|s| { let n = s.n(); (Just(s), point(n)) }), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_element(&s, &mut rng, 2);
        let b = random_element(&s, &mut rng, 2);
        for kind in [P, BracketKind::Hagiwara] {
            prop_assert_eq!(locality_defect(&s, &a, &b, &x, kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn anchor_is_a_morphism(s in structure(), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_element(&s, &mut rng, 2);
        let b = random_element(&s, &mut rng, 2);
        let sing = singular_points(&s, 4, seed);
        for kind in [P, BracketKind::Hagiwara] {
            let res = anchor_morphism_residual(&s, &a, &b, kind).unwrap();
            prop_assert!(res.iter().all(|p| p.is_zero()), "{:?}: {:?}", kind, res);
            for x in &sing {
                prop_assert!(res.iter().all(|p| p.eval(x).is_zero()));
            }
        }
    }

    #[test]
    fn module_rules_and_leibniz(
        (s, f) in structure().prop_flat_map(|s| { let n = s.n(); (Just(s), poly(n, 2, 3)) }),
        seed: u64,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_element(&s, &mut rng, 2);
        let b = random_element(&s, &mut rng, 2);
        let c = random_element(&s, &mut rng, 2);
        let (r1, r2) = module_rules_residual(&s, &f, &a, &b, P, false).unwrap();
        prop_assert!(r1.is_zero() && r2.is_zero());
        prop_assert!(leibniz_residual(&s, &a, &b, &c, P).unwrap().is_zero());
        prop_assert!(leibniz_residual(&s, &a, &b, &c, BracketKind::Hagiwara).unwrap().is_zero());
    }

    #[test]
    fn exact_forms_identity(
        (s, f, g) in structure().prop_flat_map(|s| { let (n, r) = (s.n(), s.r()); (Just(s), poly_vec(n, r - 1, 2, 3), poly_vec(n, r - 1, 2, 3)) })
    ) {
        prop_assert!(exact_forms_residual(&s, &f, &g, P).unwrap().is_zero());
    }
}

#[test]
fn lie_term_alone_is_caught() {
    let s = canonical_structure(3, 3).unwrap().scaled(&ScalarField::parse("x1").unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let caught = (0..20).any(|_| {
        let a = random_element(&s, &mut rng, 2);
        let b = random_element(&s, &mut rng, 2);
        anchor_morphism_residual(&s, &a, &b, BracketKind::LieTermOnly).unwrap().iter().any(|p| !p.is_zero())
    });
    assert!(caught);
}
