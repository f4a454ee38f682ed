//! Lie algebra presentations and left-invariant Nambu structures in
//! exponential coordinates.

use rand::Rng;

use crate::fields::{tensor_from_exact, DomainBox, PolyTensor};
use crate::linalg::{self, QMatrix};
use crate::multilinear::{det, subsets, AltTensor, MultiIndex, Variance};
use crate::nambu::{rng_for, stream, NambuStructure};
use crate::poly::Poly;
use crate::report::{CheckReport, Witness};
use crate::scalar::Q;
use crate::{Error, Result};

/// Structure constants `[a_i, a_j] = Σ_k c[i][j][k] a_k`, with an optional
/// matrix realization.
#[derive(Debug, Clone)]
pub struct LieAlgebraPresentation {
    pub name: String,
    pub labels: Vec<String>,
    pub constants: Vec<Vec<Vec<Q>>>,
    pub matrices: Option<Vec<QMatrix>>,
}

fn unit(d: usize, k: usize) -> Vec<Q> {
    (0..d).map(|i| if i == k { Q::ONE } else { Q::ZERO }).collect()
}

fn matrix_unit(m: usize, i: usize, j: usize) -> QMatrix {
    (0..m).map(|a| (0..m).map(|b| if a == i && b == j { Q::ONE } else { Q::ZERO }).collect()).collect()
}

fn mat_sub(a: &QMatrix, b: &QMatrix) -> QMatrix {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| *u - *v).collect()).collect()
}

impl LieAlgebraPresentation {
    /// From the nonzero brackets `[a_i, a_j]` with `i < j` (0-based);
    /// antisymmetry is filled in and the Jacobi identity checked.
    pub fn new(name: &str, labels: &[&str], brackets: &[(usize, usize, Vec<Q>)], matrices: Option<Vec<QMatrix>>) -> Result<Self> {
        let d = labels.len();
        let mut c = vec![vec![vec![Q::ZERO; d]; d]; d];
        for (i, j, v) in brackets {
            if *i >= d || *j >= d || v.len() != d || i == j {
                return Err(Error::Structure(format!("bracket [{i},{j}] is malformed")));
            }
            c[*i][*j] = v.clone();
            c[*j][*i] = v.iter().map(|q| -*q).collect();
        }
        let lie = LieAlgebraPresentation { name: name.into(), labels: labels.iter().map(|s| s.to_string()).collect(), constants: c, matrices };
        for (i, j, k) in (0..d).flat_map(|i| (0..d).flat_map(move |j| (0..d).map(move |k| (i, j, k)))) {
            let (a, b, e) = (unit(d, i), unit(d, j), unit(d, k));
            let jac: Vec<Q> = (0..d)
                .map(|t| {
                    lie.bracket(&a, &lie.bracket(&b, &e))[t]
                        + lie.bracket(&b, &lie.bracket(&e, &a))[t]
                        + lie.bracket(&e, &lie.bracket(&a, &b))[t]
                })
                .collect();
            if jac.iter().any(|q| !q.is_zero()) {
                return Err(Error::Structure(format!("Jacobi identity fails on ({}, {}, {})", lie.labels[i], lie.labels[j], lie.labels[k])));
            }
        }
        if let Some(ms) = &lie.matrices {
            if ms.len() != d {
                return Err(Error::Structure("one matrix per basis element required".into()));
            }
            for i in 0..d {
                for j in 0..d {
                    let comm = mat_sub(&linalg::matmul(&ms[i], &ms[j]), &linalg::matmul(&ms[j], &ms[i]));
                    let mut expect: QMatrix = vec![vec![Q::ZERO; ms[0].len()]; ms[0].len()];
                    for k in 0..d {
                        for (row, mrow) in expect.iter_mut().zip(&ms[k]) {
                            for (e, m) in row.iter_mut().zip(mrow) {
                                *e += lie.constants[i][j][k] * *m;
                            }
                        }
                    }
                    if comm != expect {
                        return Err(Error::Structure(format!("matrices disagree with [{}, {}]", lie.labels[i], lie.labels[j])));
                    }
                }
            }
        }
        Ok(lie)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn bracket(&self, u: &[Q], v: &[Q]) -> Vec<Q> {
        let d = self.dim();
        let mut out = vec![Q::ZERO; d];
        for i in 0..d {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if v[j].is_zero() {
                    continue;
                }
                for k in 0..d {
                    out[k] += u[i] * v[j] * self.constants[i][j][k];
                }
            }
        }
        out
    }

    /// `[u, v]` for polynomial vectors.
    pub fn bracket_poly(&self, u: &[Poly], v: &[Poly]) -> Vec<Poly> {
        let d = self.dim();
        let mut out = vec![Poly::zero(); d];
        for i in 0..d {
            for j in 0..d {
                if u[i].is_zero() || v[j].is_zero() {
                    continue;
                }
                let uv = u[i].mul(&v[j]);
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.constants[i][j][k];
                    if !c.is_zero() {
                        *o = o.add(&uv.scale(c));
                    }
                }
            }
        }
        out
    }

    /// Length of the lower central series, if it reaches 0 within `dim` steps.
    pub fn nilpotency_step(&self) -> Option<usize> {
        let d = self.dim();
        let mut cur: QMatrix = (0..d).map(|i| unit(d, i)).collect();
        for step in 1..=d + 1 {
            if linalg::rank(&cur) == 0 {
                return Some(step - 1);
            }
            let mut next = Vec::new();
            for i in 0..d {
                for v in &cur {
                    next.push(self.bracket(&unit(d, i), v));
                }
            }
            cur = next;
        }
        None
    }

    pub fn heisenberg() -> Self {
        let m = |i, j| matrix_unit(3, i, j);
        LieAlgebraPresentation::new(
            "heisenberg",
            &["X", "Y", "Z"],
            &[(0, 1, unit(3, 2))],
            Some(vec![m(0, 1), m(1, 2), m(0, 2)]),
        )
        .expect("valid presentation")
    }

    /// Heisenberg algebra plus a central direction W.
    pub fn heisenberg_times_r() -> Self {
        let m = |i, j| matrix_unit(4, i, j);
        LieAlgebraPresentation::new(
            "heisenberg×R",
            &["X", "Y", "Z", "W"],
            &[(0, 1, unit(4, 2))],
            Some(vec![m(0, 1), m(1, 2), m(0, 2), m(3, 3)]),
        )
        .expect("valid presentation")
    }

    pub fn abelian(d: usize) -> Self {
        let labels: Vec<String> = (1..=d).map(|i| format!("A{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let ms = (0..d).map(|i| matrix_unit(d, i, i)).collect();
        LieAlgebraPresentation::new(&format!("abelian({d})"), &refs, &[], Some(ms)).expect("valid presentation")
    }

    /// `[L_i, L_j] = ε_ijk L_k`.
    pub fn so3() -> Self {
        let mut l = vec![vec![vec![Q::ZERO; 3]; 3]; 3];
        for (k, (i, j)) in [(1usize, 2usize), (2, 0), (0, 1)].into_iter().enumerate() {
            l[k][i][j] = -Q::ONE;
            l[k][j][i] = Q::ONE;
        }
        LieAlgebraPresentation::new(
            "so3",
            &["L1", "L2", "L3"],
            &[(0, 1, unit(3, 2)), (1, 2, unit(3, 0)), (0, 2, unit(3, 1).into_iter().map(|q| -q).collect())],
            Some(l),
        )
        .expect("valid presentation")
    }

    /// Basis `E11, E12, E21, E22`.
    pub fn gl2() -> Self {
        let v = |a: [i64; 4]| a.iter().map(|&x| Q::from(x)).collect::<Vec<_>>();
        LieAlgebraPresentation::new(
            "gl2",
            &["E11", "E12", "E21", "E22"],
            &[
                (0, 1, v([0, 1, 0, 0])),
                (0, 2, v([0, 0, -1, 0])),
                (1, 2, v([1, 0, 0, -1])),
                (1, 3, v([0, 1, 0, 0])),
                (2, 3, v([0, 0, -1, 0])),
            ],
            Some(vec![matrix_unit(2, 0, 0), matrix_unit(2, 0, 1), matrix_unit(2, 1, 0), matrix_unit(2, 1, 1)]),
        )
        .expect("valid presentation")
    }
}

/// True iff all pairwise brackets of the spanning vectors stay in their span.
pub fn subalgebra_check(lie: &LieAlgebraPresentation, span: &[Vec<Q>]) -> Result<bool> {
    if span.iter().any(|v| v.len() != lie.dim()) {
        return Err(Error::Arity(format!("span vectors must have length {}", lie.dim())));
    }
    if linalg::rank(&span.to_vec()) != span.len() {
        return Err(Error::Precondition("span vectors are dependent".into()));
    }
    for i in 0..span.len() {
        for j in i + 1..span.len() {
            if !linalg::in_row_span(&span.to_vec(), &lie.bracket(&span[i], &span[j])) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Coefficients `(−1)^k B_k / k!` of `ad/(1 − e^{−ad})`.
fn left_series(order: usize) -> Vec<Q> {
    let bern = [Q::ONE, Q::new(-1, 2), Q::new(1, 6), Q::ZERO, Q::new(-1, 30), Q::ZERO, Q::new(1, 42), Q::ZERO, Q::new(-1, 30)];
    let mut fact = 1i128;
    (0..=order.min(8))
        .map(|k| {
            if k > 0 {
                fact *= k as i128;
            }
            let s = if k % 2 == 1 { -Q::ONE } else { Q::ONE };
            s * bern[k] / Q::int(fact)
        })
        .collect()
}

/// Left-invariant extension of `a` in exponential coordinates,
/// `Σ_k (−1)^k B_k/k! ad_ξ^k a`, truncated at `order`.
pub fn left_invariant_field(lie: &LieAlgebraPresentation, a: &[Q], order: usize) -> Vec<Poly> {
    let d = lie.dim();
    let xi: Vec<Poly> = (0..d).map(Poly::var).collect();
    let mut term: Vec<Poly> = a.iter().map(|q| Poly::constant(*q)).collect();
    let mut out = term.clone();
    for c in left_series(order).into_iter().skip(1) {
        term = lie.bracket_poly(&xi, &term);
        if term.iter().all(Poly::is_zero) {
            break;
        }
        if !c.is_zero() {
            out = out.iter().zip(&term).map(|(o, t)| o.add(&t.scale(c))).collect();
        }
    }
    out
}

/// `Λ = X₁ ∧ … ∧ X_r` from left-invariant extensions of `basis` on the
/// exponential-coordinate box `[−w, w]^d`.
pub fn left_invariant_structure(
    lie: &LieAlgebraPresentation,
    basis: &[Vec<Q>],
    half_width: f64,
    order: usize,
) -> Result<(NambuStructure, Vec<String>)> {
    let d = lie.dim();
    let r = basis.len();
    if r == 0 || r > d || linalg::rank(&basis.to_vec()) != r {
        return Err(Error::Precondition("basis must be independent with 1 ≤ r ≤ dim".into()));
    }
    let fields: Vec<PolyTensor> = basis
        .iter()
        .map(|a| AltTensor::from_components(Variance::Vector, left_invariant_field(lie, a, order)))
        .collect();
    let lam = AltTensor::wedge_all(d, Variance::Vector, &fields)?;
    let mut notes = Vec::new();
    match lie.nilpotency_step() {
        Some(s) if s <= order => notes.push(format!("nilpotent of step {s}: left-invariant fields are exact")),
        _ => notes.push(format!("left-invariant fields truncated at order {order}")),
    }
    let labels: Vec<String> = basis
        .iter()
        .map(|v| {
            let parts: Vec<String> = v.iter().map(|q| q.to_string()).collect();
            format!("[{}]", parts.join(" "))
        })
        .collect();
    let s = NambuStructure::new(
        &format!("{}<{}>", lie.name, labels.join(",")),
        d,
        r,
        tensor_from_exact(&lam),
        None,
        DomainBox::cube(d, -half_width, half_width),
    )?;
    Ok((s, notes))
}

/// `log(exp(η) exp(ξ))` as polynomials in ξ, Baker-Campbell-Hausdorff to
/// fourth order (exact for nilpotency step ≤ 4).
pub fn left_translation(lie: &LieAlgebraPresentation, eta: &[Q]) -> Vec<Poly> {
    let d = lie.dim();
    let x: Vec<Poly> = eta.iter().map(|q| Poly::constant(*q)).collect();
    let y: Vec<Poly> = (0..d).map(Poly::var).collect();
    let br = |a: &[Poly], b: &[Poly]| lie.bracket_poly(a, b);
    let xy = br(&x, &y);
    let xxy = br(&x, &xy);
    let yyx = br(&y, &br(&y, &x));
    let yxxy = br(&y, &xxy);
    (0..d)
        .map(|i| {
            x[i].add(&y[i])
                .add(&xy[i].scale(Q::new(1, 2)))
                .add(&xxy[i].add(&yyx[i]).scale(Q::new(1, 12)))
                .sub(&yxxy[i].scale(Q::new(1, 24)))
        })
        .collect()
}

pub const ANCHOR_LEFT_INVARIANT: &str = "(L_g)_* Λ = Λ";

/// Pushforward of Λ by left translations by seeded group elements near e;
/// exact for nilpotent algebras, sampled with `tol` otherwise.
pub fn check_left_invariance(lie: &LieAlgebraPresentation, s: &NambuStructure, trials: usize, tol: f64, seed: u64) -> Result<CheckReport> {
    let lam = s.exact_tensor()?;
    let d = lie.dim();
    let r = s.r();
    let exact = lie.nilpotency_step().is_some_and(|k| k <= 4);
    let mut rep = CheckReport::new("left_invariance", ANCHOR_LEFT_INVARIANT, &s.name, seed);
    rep.residual.exact = exact;
    let mut rng = rng_for(seed, stream::FAMILY ^ 0x4c49);
    for _ in 0..trials {
        let eta: Vec<Q> = (0..d).map(|_| Q::new(rng.random_range(-4..=4), 8)).collect();
        let t = left_translation(lie, &eta);
        let jac: Vec<Vec<Poly>> = t.iter().map(|ti| ti.gradient(d)).collect();
        let mut worst = 0.0f64;
        for k in subsets(d, r) {
            let mut push = Poly::zero();
            for (i, c) in lam.terms() {
                let minor: Vec<Vec<Poly>> = k.iter().map(|&a| i.indices().map(|b| jac[a][b].clone()).collect()).collect();
                push = push.add(&c.mul(&det(&minor)));
            }
            let target = lam.get(&MultiIndex::from_sorted(&k)).substitute(&t);
            let res = push.sub(&target);
            let size = if exact {
                res.max_abs_coeff().to_f64()
            } else {
                let mut m = 0.0f64;
                for _ in 0..8 {
                    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-0.1..0.1)).collect();
                    m = m.max(res.eval_f64(&x).abs());
                }
                m
            };
            worst = worst.max(size);
        }
        rep.evaluated += 1;
        let shown: Vec<String> = eta.iter().map(|q| q.to_string()).collect();
        rep.observe(worst, || format!("η = ({})", shown.join(", ")));
        if (exact && worst > 0.0) || (!exact && worst > tol) {
            rep.fail(Witness {
                check: "left_invariance".into(),
                point: Some(shown),
                value: format!("{worst:e}"),
                detail: "pushforward differs from Λ".into(),
                ..Witness::default()
            });
            break;
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nambu::{check_filippov_direct, CheckOptions};

    fn e(d: usize, ix: &[usize]) -> Vec<Vec<Q>> {
        ix.iter().map(|&i| unit(d, i)).collect()
    }

    #[test]
    fn presentations_and_subalgebras() {
        for l in [
            LieAlgebraPresentation::heisenberg(),
            LieAlgebraPresentation::heisenberg_times_r(),
            LieAlgebraPresentation::abelian(3),
            LieAlgebraPresentation::so3(),
            LieAlgebraPresentation::gl2(),
        ] {
            assert!(l.dim() >= 3, "{}", l.name);
        }
        assert!(subalgebra_check(&LieAlgebraPresentation::so3(), &e(3, &[0, 1, 2])).unwrap());
        let gl2 = LieAlgebraPresentation::gl2();
        let span = vec![unit(4, 1), unit(4, 2), vec![Q::ONE, Q::ZERO, Q::ZERO, Q::ONE]];
        assert!(!subalgebra_check(&gl2, &span).unwrap());
        assert!(subalgebra_check(&LieAlgebraPresentation::abelian(3), &e(3, &[0, 2])).unwrap());
        assert_eq!(LieAlgebraPresentation::heisenberg().nilpotency_step(), Some(2));
        assert_eq!(LieAlgebraPresentation::so3().nilpotency_step(), None);
    }

    #[test]
    fn heisenberg_fields_and_invariance() {
        let h = LieAlgebraPresentation::heisenberg();
        assert_eq!(
            left_invariant_field(&h, &unit(3, 0), 4),
            vec![Poly::one(), Poly::zero(), Poly::parse("-x2/2").unwrap()]
        );
        let (s, _) = left_invariant_structure(&h, &e(3, &[0, 1, 2]), 1.0, 4).unwrap();
        assert!(check_filippov_direct(&s, &CheckOptions::default()).unwrap().passed());
        assert!(check_left_invariance(&h, &s, 4, 0.0, 1).unwrap().passed());
        let a = LieAlgebraPresentation::abelian(3);
        let (s, _) = left_invariant_structure(&a, &e(3, &[0, 1, 2]), 1.0, 4).unwrap();
        assert_eq!(s.exact_tensor().unwrap(), &AltTensor::basis(3, &[0, 1, 2], Variance::Vector));
    }

    #[test]
    fn heisenberg_times_r_correspondence() {
        let l = LieAlgebraPresentation::heisenberg_times_r();
        for span in subsets(4, 3) {
            let basis = e(4, &span);
            let sub = subalgebra_check(&l, &basis).unwrap();
            let (s, _) = left_invariant_structure(&l, &basis, 1.0, 4).unwrap();
            let rep = check_filippov_direct(&s, &CheckOptions::default()).unwrap();
            assert_eq!(rep.passed(), sub, "{span:?}");
            assert_eq!(sub, span != vec![0, 1, 3]);
        }
    }
}
