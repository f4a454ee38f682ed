#![allow(dead_code)]

use nambu_core::multilinear::{AltTensor, MultiIndex, Variance};
use nambu_core::poly::Poly;
use nambu_core::Q;
use proptest::prelude::*;

pub fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn small_q() -> impl Strategy<Value = Q> {
    (-3i128..=3, 1i128..=2).prop_map(|(a, b)| Q::new(a, b))
}

pub fn nonzero_q() -> impl Strategy<Value = Q> {
    (1i128..=3, 1i128..=2, any::<bool>()).prop_map(|(a, b, neg)| Q::new(if neg { -a } else { a }, b))
}

/// Sparse alternating tensor with up to `terms` nonzero coefficients.
pub fn alt_tensor(n: usize, k: usize, variance: Variance, terms: usize) -> impl Strategy<Value = AltTensor<Q>> {
    let basis = MultiIndex::all(n, k);
    proptest::collection::vec((0..basis.len(), small_q()), 0..=terms).prop_map(move |entries| {
        let mut t = AltTensor::zero(n, k, variance);
        for (i, c) in entries {
            t.add_at(basis[i].clone(), c);
        }
        t
    })
}

/// Sum of up to `terms` monomials of degree ≤ `deg` in `x1..xn`.
pub fn poly(n: usize, deg: usize, terms: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec((proptest::collection::vec(0..n, 0..=deg), -3i64..=3), 1..=terms).prop_map(|ms| {
        ms.into_iter().fold(Poly::zero(), |acc, (vars, c)| {
            let m = vars.iter().fold(Poly::constant(Q::from(c)), |p, &i| p.mul(&Poly::var(i)));
            acc.add(&m)
        })
    })
}

pub fn poly_vec(n: usize, len: usize, deg: usize, terms: usize) -> impl Strategy<Value = Vec<Poly>> {
    proptest::collection::vec(poly(n, deg, terms), len)
}

/// Rational point with coordinates `k/8`, `|k| ≤ 12`.
pub fn point(n: usize) -> impl Strategy<Value = Vec<Q>> {
    proptest::collection::vec((-12i128..=12).prop_map(|k| Q::new(k, 8)), n)
}

pub fn to_f64(x: &[Q]) -> Vec<f64> {
    x.iter().map(Q::to_f64).collect()
}
