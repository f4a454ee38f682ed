mod common;

use common::poly;
use nambu_core::poly::Poly;
use nambu_core::towers::{
    check_compat, check_tower_chart, classify_tower_point_direct, classify_tower_point_projective, coordinate_tower, limit_bracket_eval,
    limit_bracket_levels, TowerKind, TowerPoint, TowerPointKind, TowerSpec,
};
use nambu_core::{Error, Q};
use proptest::prelude::*;

/// Levels R⁴, R⁵, R⁶ with `c ∂₁∧∂₂∧∂₃` and `c` in the level-1 coordinates.
fn tower(kind: TowerKind) -> impl Strategy<Value = TowerSpec> {
    poly(4, 2, 3).prop_filter("nonzero", |c| !c.is_zero()).prop_map(move |c| coordinate_tower(kind, 3, 3, 3, |_| c.clone()).unwrap())
}

fn coord() -> impl Strategy<Value = Q> {
    prop_oneof![1 => Just(Q::ZERO), 2 => (-12i128..=12).prop_map(|k| Q::new(k, 8))]
}

fn points(n: usize) -> impl Strategy<Value = Vec<Vec<Q>>> {
    proptest::collection::vec(proptest::collection::vec(coord(), n), 20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projective_points_never_mixed(t in tower(TowerKind::Projective), tops in points(6)) {
        prop_assert!(check_compat(&t).unwrap().passed());
        for top in &tops {
            let p = TowerPoint::from_top(&t, top).unwrap();
            match classify_tower_point_projective(&t, &p) {
                Ok(c) => {
                    prop_assert!(c.monotone, "{:?}", c);
                    prop_assert!(c.class != TowerPointKind::Mixed, "{:?}", c);
                }
                Err(Error::Precondition(_)) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    #[test]
    fn direct_points_stay_regular(t in tower(TowerKind::Direct), xs in points(6), entries in proptest::collection::vec(1usize..=3, 20)) {
        prop_assert!(check_compat(&t).unwrap().passed());
        for (x, &h) in xs.iter().zip(&entries) {
            let n = t.levels()[h - 1].n();
            let p = TowerPoint::enter(&t, h, &x[..n]).unwrap();
            match classify_tower_point_direct(&t, &p) {
                Ok(c) => {
                    prop_assert!(c.monotone, "{:?}", c);
                    let first = c.ranks.iter().position(|(_, r)| *r > 0);
                    prop_assert_eq!(c.stratum, first.map(|f| c.ranks[f].0));
                    if let Some(k) = c.stratum {
                        prop_assert!(c.ranks.iter().all(|&(i, r)| (i >= k) == (r > 0)));
                    }
                }
                Err(Error::Precondition(_)) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    #[test]
    fn limit_bracket_level_independent(
        t in tower(TowerKind::Projective),
        top in proptest::collection::vec(coord(), 6),
        gs in proptest::collection::vec(poly(4, 2, 3), 3),
        hs in proptest::collection::vec(poly(5, 2, 3), 3),
    ) {
        let p = TowerPoint::from_top(&t, &top).unwrap();
        let vals = limit_bracket_levels(&t, 1, &gs, &p).unwrap();
        prop_assert_eq!(vals.len(), 3);
        prop_assert!(vals.iter().all(|(_, v)| *v == vals[0].1), "{:?}", vals);
        let from2 = limit_bracket_levels(&t, 2, &hs, &p).unwrap();
        prop_assert!(from2.iter().all(|(_, v)| *v == from2[0].1), "{:?}", from2);
        let pulled: Vec<Poly> = hs.iter().map(|h| h.compose_linear(&t.composite(2, 3).unwrap())).collect();
        prop_assert_eq!(limit_bracket_eval(&t, 3, &pulled, &p).unwrap(), from2[0].1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn level_one_charts_straighten_the_limit(
        c in proptest::sample::select(vec!["1", "x1^2 + 1", "x4 + 3", "x1"]),
        x in proptest::collection::vec((-6i128..=6).prop_map(|k| Q::new(k, 8)), 4),
        seed in 0u64..100,
    ) {
        let coeff = Poly::parse(c).unwrap();
        prop_assume!(!coeff.eval(&x).is_zero());
        let t = coordinate_tower(TowerKind::Projective, 3, 3, 3, |_| coeff.clone()).unwrap();
        let rep = check_tower_chart(&t, &x, 8, seed).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep.residual);
    }
}
