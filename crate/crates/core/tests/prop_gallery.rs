mod common;

use common::poly;
use nambu_core::fields::ScalarField;
use nambu_core::gallery::{
    canonical_structure, check_left_invariance, convergence_slope, l1_summability, l1_truncated, left_invariant_structure, loop_bracket,
    subalgebra_check, DiscretizedLoop, LieAlgebraPresentation,
};
use nambu_core::linalg;
use nambu_core::nambu::{check_filippov_direct, CheckOptions};
use nambu_core::Q;
use proptest::prelude::*;
use std::f64::consts::TAU;

/// Three independent vectors of h₃ × R (basis X, Y, Z, W with [X, Y] = Z).
fn span() -> impl Strategy<Value = Vec<Vec<Q>>> {
    proptest::collection::vec(proptest::collection::vec((-2i64..=2).prop_map(Q::from), 4), 3)
        .prop_filter("independent", |b| linalg::rank(b) == 3)
}

/// Closed under brackets iff every bracket vanishes or Z lies in the span.
fn closed(b: &[Vec<Q>]) -> bool {
    let commuting = (0..3).all(|i| (0..3).all(|j| (b[i][0] * b[j][1] - b[i][1] * b[j][0]).is_zero()));
    let mut with_z = b.to_vec();
    with_z.push(vec![Q::ZERO, Q::ZERO, Q::ONE, Q::ZERO]);
    commuting || linalg::rank(&with_z) == 3
}

fn trig_loop(c: &[f64], samples: usize) -> DiscretizedLoop {
    DiscretizedLoop::from_fn(samples, |t| {
        (0..3).map(|i| c[3 * i] + c[3 * i + 1] * (TAU * t).cos() + c[3 * i + 2] * (TAU * 2.0 * t).sin()).collect()
    })
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-0.6f64..0.6, 9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn subalgebras_are_exactly_the_fi_spans(b in span()) {
        let lie = LieAlgebraPresentation::heisenberg_times_r();
        let sub = subalgebra_check(&lie, &b).unwrap();
        prop_assert_eq!(sub, closed(&b));
        let (s, _) = left_invariant_structure(&lie, &b, 1.0, 4).unwrap();
        let rep = check_filippov_direct(&s, &CheckOptions::default()).unwrap();
        prop_assert!(rep.residual.exact);
        prop_assert_eq!(rep.passed(), sub);
        if !sub {
            prop_assert!(!rep.witnesses.is_empty());
        }
    }

    #[test]
    fn left_invariant_tensors_are_invariant(b in span(), seed: u64) {
        let lie = LieAlgebraPresentation::heisenberg_times_r();
        let (s, _) = left_invariant_structure(&lie, &b, 1.0, 4).unwrap();
        let rep = check_left_invariance(&lie, &s, 4, 1e-9, seed).unwrap();
        prop_assert!(rep.passed() && rep.residual.exact, "{:?}", rep.witnesses);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn loop_bracket_alternates(fs in proptest::collection::vec(poly(3, 2, 3), 3), c in coeffs()) {
        let s = canonical_structure(3, 3).unwrap().scaled(&ScalarField::parse("x1").unwrap()).unwrap();
        let g = trig_loop(&c, 24);
        let f: Vec<ScalarField> = fs.into_iter().map(ScalarField::from).collect();
        let base = loop_bracket(&s, &f, &g).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let mut sw = f.clone();
            sw.swap(i, j);
            let v = loop_bracket(&s, &sw, &g).unwrap();
            prop_assert!((v + base).abs() <= 1e-12 * (1.0 + base.abs()), "{} vs {}", v, base);
        }
        let same = vec![f[0].clone(), f[0].clone(), f[2].clone()];
        prop_assert!(loop_bracket(&s, &same, &g).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn loop_bracket_additive(fs in proptest::collection::vec(poly(3, 2, 3), 3), c1 in coeffs(), c2 in coeffs()) {
        let s = canonical_structure(3, 3).unwrap().scaled(&ScalarField::parse("x1^2 + 1").unwrap()).unwrap();
        let f: Vec<ScalarField> = fs.into_iter().map(ScalarField::from).collect();
        let (a, b) = (trig_loop(&c1, 16), trig_loop(&c2, 16));
        let joined = loop_bracket(&s, &f, &a.concat(&b).unwrap()).unwrap();
        let parts = (loop_bracket(&s, &f, &a).unwrap() + loop_bracket(&s, &f, &b).unwrap()) / 2.0;
        prop_assert!((joined - parts).abs() <= 1e-12 * (1.0 + parts.abs()));
    }

    #[test]
    fn summability_certificate(idx in proptest::sample::subsequence((1usize..=12).collect::<Vec<_>>(), 3..=8)) {
        let p = |k: u32| idx.iter().fold(Q::ZERO, |acc, &i| acc + Q::new(1, (i as i128).pow(k)));
        let (p1, p2, p3) = (p(1), p(2), p(3));
        let e3 = (p1 * p1 * p1 - Q::from(3) * p1 * p2 + Q::from(2) * p3) / Q::from(6);
        let cert = l1_summability(&idx);
        prop_assert_eq!(cert.bound, p3);
        prop_assert_eq!(cert.sum, e3);
        prop_assert_eq!(cert.holds, e3 <= p3);
        let (_, again) = l1_truncated(12, &idx).unwrap();
        prop_assert_eq!(again, cert);
    }

    #[test]
    fn quadrature_converges(a in 0.2f64..0.4, mean in 0.02f64..0.1) {
        let s = canonical_structure(3, 3).unwrap().scaled(&ScalarField::parse("x1").unwrap()).unwrap();
        let coords: Vec<ScalarField> = (0..3).map(ScalarField::var).collect();
        let ns = [8, 16, 32, 64];
        let errs: Vec<f64> = ns
            .iter()
            .map(|&n| (loop_bracket(&s, &coords, &DiscretizedLoop::kernel_loop(n, a, mean).unwrap()).unwrap() - mean).abs())
            .collect();
        prop_assert!(convergence_slope(&ns, &errs) >= 1.9, "{:?}", errs);
    }
}
