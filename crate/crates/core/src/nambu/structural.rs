//! Decomposability (Plücker-type relations) and the structural Filippov
//! verifier: pointwise decomposability plus rank-r involutive distribution.

use serde::Serialize;

use crate::fields::lie_bracket_at;
use crate::fields::VectorField;
use crate::linalg;
use crate::multilinear::{subsets, AltTensor, MultiIndex, Variance};
use crate::report::{fmt_point, CheckReport, Witness};
use crate::scalar::{Q, Scalar};
use crate::{Error, Result};

use super::{rng_for, stream, CheckOptions, NambuStructure, PointKind};

pub const ANCHOR_STRUCTURAL: &str = "FI at regular points: Λ decomposable, distribution of rank r and involutive";

#[derive(Debug, Clone, Serialize)]
pub struct PluckerResult<R> {
    pub decomposable: bool,
    /// `X₁ … X_r` with `X₁ ∧ … ∧ X_r = Λ`, when decomposable and nonzero.
    #[serde(skip)]
    pub factors: Option<Vec<Vec<R>>>,
    /// Largest relation residual (normalized by `‖Λ‖²` in float mode).
    pub violation: f64,
    /// `(c, a, b)` of the worst violated relation.
    pub witness: Option<(Vec<usize>, usize, usize)>,
}

fn covector<R: Scalar>(n: usize, ix: &[usize]) -> AltTensor<R> {
    match MultiIndex::normalize(ix) {
        Some((k, s)) => {
            let mut t = AltTensor::zero(n, ix.len(), Variance::Covector);
            t.add_at(k, R::from_int(s as i64));
            t
        }
        None => AltTensor::zero(n, ix.len(), Variance::Covector),
    }
}

/// Exhausts `Λ_{c,a} ∧ Λ_b + Λ_{c,b} ∧ Λ_a = 0` over increasing
/// (r−2)-subsets `c` of basis covectors and pairs `a ≤ b`; `tol` is relative
/// to `‖Λ‖²` (use 0 for exact data).
pub fn plucker_check<R: Scalar>(lam: &AltTensor<R>, tol: f64) -> Result<PluckerResult<R>> {
    let r = lam.degree();
    let n = lam.n();
    if r < 3 {
        return Err(Error::Unsupported("decomposability relations need r ≥ 3".into()));
    }
    if lam.variance() != Variance::Vector {
        return Err(Error::Structure("decomposability test expects a multivector".into()));
    }
    let scale = lam.norm2().powi(2).max(f64::MIN_POSITIVE);
    let single: Vec<AltTensor<R>> = (0..n)
        .map(|a| covector::<R>(n, &[a]).contract_into(lam).expect("shapes"))
        .collect();
    let mut violation = 0.0;
    let mut witness = None;
    for c in subsets(n, r - 2) {
        let with: Vec<AltTensor<R>> = (0..n)
            .map(|a| {
                let mut ix = c.clone();
                ix.push(a);
                covector::<R>(n, &ix).contract_into(lam).expect("shapes")
            })
            .collect();
        for a in 0..n {
            for b in a..n {
                let rel = with[a].wedge(&single[b])?.add(&with[b].wedge(&single[a])?)?;
                let v = rel.max_abs() / if tol > 0.0 { scale } else { 1.0 };
                if v > violation {
                    violation = v;
                    witness = Some((c.clone(), a, b));
                }
            }
        }
    }
    let decomposable = violation <= tol;
    let factors = if decomposable && !lam.is_zero() { Some(factorize(lam)) } else { None };
    Ok(PluckerResult { decomposable, factors, violation, witness: if decomposable { None } else { witness } })
}

/// Contract with `dx^{K∖K_i}` for the lexicographically first `K` of maximal
/// `|Λ_K|`, then rescale the first vector so the wedge reproduces `Λ`.
pub fn factorize<R: Scalar>(lam: &AltTensor<R>) -> Vec<Vec<R>> {
    let n = lam.n();
    let mut best: Option<(&MultiIndex, &R)> = None;
    for (k, c) in lam.terms() {
        let v = c.to_f64().abs();
        if best.is_none_or(|(_, b)| v > b.to_f64().abs()) {
            best = Some((k, c));
        }
    }
    let (k, ck) = best.expect("nonzero tensor");
    let ks = k.to_vec();
    let mut vecs: Vec<AltTensor<R>> = (0..ks.len())
        .map(|i| {
            let rest: Vec<usize> = ks.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
            covector::<R>(n, &rest).contract_into(lam).expect("shapes")
        })
        .collect();
    let w = AltTensor::wedge_all(n, Variance::Vector, &vecs).expect("shapes");
    let factor = w.get(k).divide(ck);
    vecs[0] = vecs[0].scale(&R::one().divide(&factor));
    vecs.iter().map(|v| v.components()).collect()
}

/// Structural FI verdict from seeded samples; requires r ≥ 3.
pub fn check_filippov_structural(s: &NambuStructure, opts: &CheckOptions) -> CheckReport {
    let mut rep = CheckReport::new("filippov_structural", ANCHOR_STRUCTURAL, &s.name, opts.seed);
    if s.r() < 3 {
        return CheckReport::unsupported(
            "filippov_structural",
            ANCHOR_STRUCTURAL,
            &s.name,
            opts.seed,
            "r = 2: decomposability does not follow from the Jacobi identity; use filippov_direct",
        );
    }
    rep.residual.exact = false;
    let omegas: Vec<AltTensor<f64>> = s.basis_multicovectors().into_iter().map(|(_, w)| w.map_into(Q::to_f64)).collect();
    let mut rng = rng_for(opts.seed, stream::STRUCTURAL);
    let mut regular = 0;
    for _ in 0..opts.samples {
        let x = s.domain().sample(&mut rng);
        rep.evaluated += 1;
        let class = s.classify_point(&x);
        if class.class == PointKind::Singular {
            continue;
        }
        regular += 1;
        let (violation, defect) = structural_defect_at(s, &omegas, &x);
        rep.observe(violation, || fmt_point(&x));
        if let Some((detail, value)) = defect {
            rep.fail(Witness {
                check: "filippov_structural".into(),
                point: Some(x.iter().map(|v| format!("{v:?}")).collect()),
                value,
                detail,
                ..Witness::default()
            });
        }
        if rep.witnesses.len() >= opts.max_witnesses {
            break;
        }
    }
    rep.note(format!("{regular} regular of {} sampled points", rep.evaluated));
    rep
}

/// Plücker violation at a regular point `x`, with `(detail, value)` when
/// decomposability, the rank of the distribution or involutivity fails.
/// `omegas` are the basis multi-covectors as floats.
pub fn structural_defect_at(s: &NambuStructure, omegas: &[AltTensor<f64>], x: &[f64]) -> (f64, Option<(String, String)>) {
    let lam = s.lambda_at(x);
    let p = plucker_check(&lam, 1e-9).expect("r ≥ 3");
    if !p.decomposable {
        let (c, a, b) = p.witness.clone().unwrap_or_default();
        let c1: Vec<usize> = c.iter().map(|i| i + 1).collect();
        return (p.violation, Some((format!("not decomposable: c = {c1:?}, a = {}, b = {}", a + 1, b + 1), format!("{:.3e}", p.violation))));
    }
    let jl = s.lambda_jet1_at(x);
    let fields: Vec<Vec<crate::fields::Jet1>> = omegas
        .iter()
        .map(|w| w.map_into(|v| crate::fields::Jet1::constant(*v)).contract_into(&jl).expect("shapes").components())
        .collect();
    let frame: Vec<Vec<f64>> = fields.iter().map(|f| f.iter().map(|j| j.value).collect()).collect();
    let rank = linalg::numerical_rank(&linalg::to_dmatrix(&frame), 1e-10);
    let mut all = frame.clone();
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            all.push(bracket_of_jets(&fields[i], &fields[j]));
        }
    }
    let full = linalg::numerical_rank(&linalg::to_dmatrix(&all), 1e-9);
    let defect = if rank != s.r() {
        Some(("distribution rank differs from r".to_string(), format!("rank {rank}")))
    } else if full > s.r() {
        Some(("distribution not involutive".to_string(), format!("rank with brackets {full}")))
    } else {
        None
    };
    (p.violation, defect)
}

/// `[Y, Z]` at a point from 1-jets of the components.
fn bracket_of_jets(y: &[crate::fields::Jet1], z: &[crate::fields::Jet1]) -> Vec<f64> {
    let n = y.len();
    (0..n).map(|i| (0..n).map(|j| y[j].value * z[i].d(j) - z[j].value * y[i].d(j)).sum()).collect()
}

/// Rank of `span{X_i(x)}` and of the span enlarged by all pairwise brackets.
pub fn distribution_ranks(fields: &[VectorField], x: &[f64]) -> (usize, usize) {
    let frame: Vec<Vec<f64>> = fields.iter().map(|f| f.value(x)).collect();
    let mut all = frame.clone();
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            all.push(lie_bracket_at(&fields[i], &fields[j], x));
        }
    }
    (
        linalg::numerical_rank(&linalg::to_dmatrix(&frame), 1e-10),
        linalg::numerical_rank(&linalg::to_dmatrix(&all), 1e-10),
    )
}

/// Exact rank of constant-coefficient vectors.
pub fn exact_rank(vectors: &[Vec<Q>]) -> usize {
    linalg::rank(&vectors.to_vec())
}
