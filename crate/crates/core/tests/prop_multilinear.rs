mod common;

use common::{alt_tensor, small_q};
use nambu_core::multilinear::{permutations, AltTensor, MultiIndex, Variance};
use nambu_core::Q;
use proptest::prelude::*;

fn sign(p: &[usize]) -> Q {
    let inv = (0..p.len()).flat_map(|i| (i + 1..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
    if inv % 2 == 0 {
        Q::ONE
    } else {
        -Q::ONE
    }
}

fn vectors(n: usize, k: usize) -> impl Strategy<Value = Vec<AltTensor<Q>>> {
    proptest::collection::vec(proptest::collection::vec(small_q(), n), k)
        .prop_map(|vs| vs.into_iter().map(|c| AltTensor::from_components(Variance::Vector, c)).collect())
}

fn degrees() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..=6).prop_flat_map(|n| (Just(n), 0..=n, 0..=n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_graded_commutative(
        (a, b) in degrees().prop_flat_map(|(n, p, q)| (alt_tensor(n, p, Variance::Covector, 4), alt_tensor(n, q, Variance::Covector, 4)))
    ) {
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let s = if a.degree() * b.degree() % 2 == 0 { Q::ONE } else { -Q::ONE };
        prop_assert_eq!(ab, ba.scale(&s));
    }

    #[test]
    fn eval_alt_permutation_sign(
        (t, args) in (1usize..=4).prop_flat_map(|k| (k..=8).prop_map(move |n| (n, k)))
            .prop_flat_map(|(n, k)| (alt_tensor(n, k, Variance::Covector, 5), vectors(n, k)))
    ) {
        let base = t.eval_alt(&args).unwrap();
        for p in permutations(args.len()) {
            let permuted: Vec<AltTensor<Q>> = p.iter().map(|&i| args[i].clone()).collect();
            prop_assert_eq!(t.eval_alt(&permuted).unwrap(), sign(&p) * base);
        }
    }

    #[test]
    fn alternate_idempotent(
        (n, k, raw) in (1usize..=4).prop_flat_map(|k| (k..=6).prop_map(move |n| (n, k)))
            .prop_flat_map(|(n, k)| (Just(n), Just(k), proptest::collection::vec((proptest::collection::vec(0..n, k), small_q()), 0..6)))
    ) {
        let once = AltTensor::alternate(n, k, Variance::Covector, &raw).unwrap();
        let twice = AltTensor::alternate(n, k, Variance::Covector, &once.to_raw()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn full_contraction_is_eval_alt(
        (t, ix) in (1usize..=4).prop_flat_map(|k| (k..=7).prop_map(move |n| (n, k)))
            .prop_flat_map(|(n, k)| (alt_tensor(n, k, Variance::Covector, 5), proptest::sample::subsequence((0..n).collect::<Vec<_>>(), k)))
    ) {
        let n = t.n();
        let dual = AltTensor::<Q>::basis(n, &ix, Variance::Vector);
        let args: Vec<AltTensor<Q>> = ix.iter().map(|&i| AltTensor::basis(n, &[i], Variance::Vector)).collect();
        let by_pair = dual.pair(&t).unwrap();
        prop_assert_eq!(by_pair, t.eval_alt(&args).unwrap());
        prop_assert_eq!(by_pair, t.get(&MultiIndex::from_sorted(&ix)));
    }

    #[test]
    fn contraction_then_evaluation(
        (t, args) in (2usize..=4).prop_flat_map(|k| (k..=6).prop_map(move |n| (n, k)))
            .prop_flat_map(|(n, k)| (alt_tensor(n, k, Variance::Covector, 5), vectors(n, k)))
    ) {
        let inner = args[0].contract_into(&t).unwrap();
        prop_assert_eq!(inner.eval_alt(&args[1..]).unwrap(), t.eval_alt(&args).unwrap());
    }
}
