//! Leibniz, Filippov (direct and Lie-derivative) and commutator checks,
//! plus the point-classification census.

use crate::fields::{apply_vector, bracket_from_grads, lie_bracket_poly, lie_derivative_multivector_poly, Jet1};
use crate::multilinear::{subsets, AltTensor};
use crate::poly::Poly;
use crate::report::{fmt_point, CheckReport, Witness};
use crate::scalar::Ring;

use super::{
    ham_from_grads, rng_for, stream, test_family, FamilyKind, NambuStructure, PointKind, TestFamily,
};

/// Knobs shared by every check battery.
#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub seed: u64,
    /// Sample points for numeric residuals and censuses.
    pub samples: usize,
    /// Absolute tolerance for numeric residuals.
    pub tol: f64,
    pub family: FamilyKind,
    /// Stop after this many witnesses.
    pub max_witnesses: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { seed: 1, samples: 64, tol: 1e-9, family: FamilyKind::Quad, max_witnesses: 1 }
    }
}

pub const ANCHOR_LEIBNIZ: &str = "Leibniz rule (L) in the last slot";
pub const ANCHOR_FI: &str = "fundamental (Filippov) identity";
pub const ANCHOR_LIE: &str = "L_X Λ = 0 on T♭M for every Hamiltonian X";
pub const ANCHOR_COMMUTATOR: &str = "[X_f, X_g] = Σ X_{g₁..X_f(g_i)..g_{r−1}}";
pub const ANCHOR_CENSUS: &str = "range of P has dimension 0 or ≥ r; exactly r under FI";

fn show_slots(fam: &TestFamily, ix: &[usize]) -> Vec<String> {
    ix.iter().map(|&i| fam.members[i].to_string()).collect()
}

/// Coefficients that can be differentiated once more: polynomials, or
/// 1-jets whose partials are returned as constants.
pub(crate) trait Jetlike: Ring {
    fn partial(&self, j: usize) -> Self;
    fn size(&self) -> f64;
    fn show(&self) -> String;
}

impl Jetlike for Poly {
    fn partial(&self, j: usize) -> Self {
        self.derivative(j)
    }
    fn size(&self) -> f64 {
        self.max_abs_coeff().to_f64()
    }
    fn show(&self) -> String {
        self.to_string()
    }
}

impl Jetlike for Jet1 {
    fn partial(&self, j: usize) -> Self {
        Jet1::constant(self.d(j))
    }
    fn size(&self) -> f64 {
        self.value.abs()
    }
    fn show(&self) -> String {
        format!("{:.6e}", self.value)
    }
}

struct FiOutcome {
    evaluated: usize,
    max: f64,
    max_at: Option<(Vec<usize>, Vec<usize>)>,
    failures: Vec<(Vec<usize>, Vec<usize>, String)>,
}

/// Residual `{f,{g₁..g_r}} − Σ_i {g₁..{f,g_i}..g_r}` over every pair of
/// an (r−1)-subset and an r-subset of the family. `grads[k]` is the
/// gradient of member `k`, each entry differentiable once more.
fn fi_core<E: Jetlike>(lam: &AltTensor<E>, grads: &[Vec<E>], tol: f64, max_fail: usize) -> FiOutcome {
    let r = lam.degree();
    let n = lam.n();
    let fsets = subsets(grads.len(), r - 1);
    let gsets = subsets(grads.len(), r);
    let brackets: Vec<E> = gsets
        .iter()
        .map(|g| {
            let refs: Vec<&[E]> = g.iter().map(|&k| grads[k].as_slice()).collect();
            bracket_from_grads(lam, &refs)
        })
        .collect();
    let mut dbr: Vec<Option<Vec<E>>> = vec![None; gsets.len()];
    let mut out = FiOutcome { evaluated: 0, max: 0.0, max_at: None, failures: Vec::new() };
    for fset in &fsets {
        let fg: Vec<Vec<E>> = fset.iter().map(|&k| grads[k].clone()).collect();
        let x = ham_from_grads(lam, &fg);
        let active: Vec<usize> = (0..n).filter(|&j| !x[j].is_zero()).collect();
        if active.is_empty() {
            out.evaluated += gsets.len();
            continue;
        }
        // X_f(g_k) and its gradient for every member.
        let dh: Vec<Option<Vec<E>>> = grads
            .iter()
            .map(|g| {
                let mut h = E::zero();
                for &j in &active {
                    if !g[j].is_zero() {
                        h = h.plus(&x[j].times(&g[j]));
                    }
                }
                if h.is_zero() {
                    None
                } else {
                    Some((0..n).map(|k| h.partial(k)).collect())
                }
            })
            .collect();
        for (gi, g) in gsets.iter().enumerate() {
            out.evaluated += 1;
            let mut res = E::zero();
            if !brackets[gi].is_zero() {
                let d = dbr[gi].get_or_insert_with(|| (0..n).map(|j| brackets[gi].partial(j)).collect());
                for &j in &active {
                    if !d[j].is_zero() {
                        res = res.plus(&x[j].times(&d[j]));
                    }
                }
            }
            for (slot, &k) in g.iter().enumerate() {
                let Some(h) = &dh[k] else { continue };
                let refs: Vec<&[E]> = g
                    .iter()
                    .enumerate()
                    .map(|(s, &m)| if s == slot { h.as_slice() } else { grads[m].as_slice() })
                    .collect();
                res = res.minus(&bracket_from_grads(lam, &refs));
            }
            let mag = res.size();
            if mag > out.max {
                out.max = mag;
                out.max_at = Some((fset.clone(), g.clone()));
            }
            if mag > tol {
                out.failures.push((fset.clone(), g.clone(), res.show()));
                if out.failures.len() >= max_fail {
                    return out;
                }
            }
        }
    }
    out
}

/// Direct evaluation of the Filippov identity on the test family; exact when
/// the tensor is polynomial, otherwise at seeded sample points.
pub fn check_filippov_direct(s: &NambuStructure, opts: &CheckOptions) -> crate::Result<CheckReport> {
    let fam = test_family(s, opts.family, opts.seed);
    check_filippov_direct_with(s, &fam, opts)
}

pub fn check_filippov_direct_with(s: &NambuStructure, fam: &TestFamily, opts: &CheckOptions) -> crate::Result<CheckReport> {
    if fam.len() < s.r() + 1 {
        return Err(crate::Error::Config(format!(
            "test family has {} functions; order {} needs at least {}",
            fam.len(),
            s.r(),
            s.r() + 1
        )));
    }
    let mut rep = CheckReport::new("filippov_direct", ANCHOR_FI, &s.name, opts.seed);
    rep.note(format!("family {:?} with {} functions", fam.kind, fam.len()));
    let n = s.n();
    if let Ok(lam) = s.exact_tensor() {
        let grads: Vec<Vec<Poly>> = fam.members.iter().map(|p| p.gradient(n)).collect();
        let o = fi_core(lam, &grads, 0.0, opts.max_witnesses);
        rep.evaluated = o.evaluated;
        rep.residual.max = o.max;
        rep.residual.at = o.max_at.map(|(f, g)| format!("f={:?} g={:?}", show_slots(fam, &f), show_slots(fam, &g)));
        for (f, g, v) in o.failures {
            rep.fail(Witness {
                check: "filippov_direct".into(),
                f_slots: show_slots(fam, &f),
                g_slots: show_slots(fam, &g),
                point: None,
                value: v,
                detail: String::new(),
            });
        }
        return Ok(rep);
    }
    rep.residual.exact = false;
    let mut rng = rng_for(opts.seed, stream::NUMERIC_FI);
    for _ in 0..opts.samples {
        let x = s.domain().sample(&mut rng);
        let lam = s.lambda_jet1_at(&x);
        let grads: Vec<Vec<Jet1>> = fam
            .members
            .iter()
            .map(|p| {
                let (_, g, h) = p.jet2_f64(&x);
                (0..n).map(|j| Jet1::new(g[j], h[j].clone())).collect()
            })
            .collect();
        let o = fi_core(&lam, &grads, opts.tol, opts.max_witnesses - rep.witnesses.len());
        rep.evaluated += o.evaluated;
        if o.max > rep.residual.max {
            rep.residual.max = o.max;
            rep.residual.at = Some(fmt_point(&x));
        }
        for (f, g, v) in o.failures {
            rep.fail(Witness {
                check: "filippov_direct".into(),
                f_slots: show_slots(fam, &f),
                g_slots: show_slots(fam, &g),
                point: Some(x.iter().map(|v| format!("{v:?}")).collect()),
                value: v,
                detail: String::new(),
            });
        }
        if rep.witnesses.len() >= opts.max_witnesses {
            break;
        }
    }
    Ok(rep)
}

/// Leibniz rule in the last slot with the structure's own bracket.
pub fn check_leibniz(s: &NambuStructure, opts: &CheckOptions) -> CheckReport {
    match s.exact_tensor() {
        Ok(lam) => {
            let lam = lam.clone();
            check_leibniz_with(s, opts, &move |fs: &[&Poly]| crate::fields::bracket_poly(&lam, fs))
        }
        Err(e) => CheckReport::unsupported("leibniz", ANCHOR_LEIBNIZ, &s.name, opts.seed, &e.to_string()),
    }
}

/// Leibniz check against an arbitrary bracket; f-slots run over the linear
/// members, the product slot over pairs of quadratic-family members.
pub fn check_leibniz_with(s: &NambuStructure, opts: &CheckOptions, bracket: &dyn Fn(&[&Poly]) -> Poly) -> CheckReport {
    let mut rep = CheckReport::new("leibniz", ANCHOR_LEIBNIZ, &s.name, opts.seed);
    let fam = test_family(s, FamilyKind::Quad, opts.seed);
    let lin = fam.linear();
    let r = s.r();
    for fset in subsets(lin.len(), r - 1) {
        let fs: Vec<&Poly> = fset.iter().map(|&i| &fam.members[lin[i]]).collect();
        for a in 0..fam.len() {
            for b in a..fam.len() {
                let (g, h) = (&fam.members[a], &fam.members[b]);
                let gh = g.mul(h);
                let with = |p: &Poly| {
                    let mut v = fs.clone();
                    v.push(p);
                    bracket(&v)
                };
                let res = with(&gh).sub(&g.mul(&with(h))).sub(&h.mul(&with(g)));
                rep.evaluated += 1;
                let mag = res.max_abs_coeff().to_f64();
                rep.observe(mag, || format!("f={fs:?} g={g} h={h}"));
                if !res.is_zero() {
                    rep.fail(Witness {
                        check: "leibniz".into(),
                        f_slots: fs.iter().map(|p| p.to_string()).collect(),
                        g_slots: vec![g.to_string(), h.to_string()],
                        point: None,
                        value: res.to_string(),
                        detail: String::new(),
                    });
                    if rep.witnesses.len() >= opts.max_witnesses {
                        return rep;
                    }
                }
            }
        }
    }
    rep
}

/// For every Hamiltonian field of the family, `L_X Λ` evaluated on the
/// differentials of the restriction forms.
pub fn check_lie_derivative_criterion(s: &NambuStructure, opts: &CheckOptions) -> CheckReport {
    let lam = match s.exact_tensor() {
        Ok(l) => l,
        Err(e) => return CheckReport::unsupported("lie_derivative", ANCHOR_LIE, &s.name, opts.seed, &e.to_string()),
    };
    let mut rep = CheckReport::new("lie_derivative", ANCHOR_LIE, &s.name, opts.seed);
    let fam = test_family(s, opts.family, opts.seed);
    let lin = s.restriction_forms();
    let r = s.r();
    let gsets = subsets(lin.len(), r);
    for fset in subsets(fam.len(), r - 1) {
        let fs: Vec<&Poly> = fset.iter().map(|&i| &fam.members[i]).collect();
        let x = s.hamiltonian_poly(&fs).expect("exact");
        if x.iter().all(Poly::is_zero) {
            rep.evaluated += gsets.len();
            continue;
        }
        for g in &gsets {
            let gs: Vec<&Poly> = g.iter().map(|&i| &lin[i]).collect();
            let v = lie_derivative_multivector_poly(&x, lam, &gs);
            rep.evaluated += 1;
            rep.observe(v.max_abs_coeff().to_f64(), || format!("f={fs:?} g={gs:?}"));
            if !v.is_zero() {
                rep.fail(Witness {
                    check: "lie_derivative".into(),
                    f_slots: fs.iter().map(|p| p.to_string()).collect(),
                    g_slots: gs.iter().map(|p| p.to_string()).collect(),
                    point: None,
                    value: v.to_string(),
                    detail: String::new(),
                });
                if rep.witnesses.len() >= opts.max_witnesses {
                    return rep;
                }
            }
        }
    }
    rep
}

/// `[X_f, X_g] − Σ_i X_{g₁..X_f(g_i)..g_{r−1}}`, symbolically.
pub fn commutator_residual(s: &NambuStructure, f: &[Poly], g: &[Poly]) -> crate::Result<Vec<Poly>> {
    if f.len() + 1 != s.r() || g.len() + 1 != s.r() {
        return Err(crate::Error::Arity(format!("commutator identity needs two groups of {} functions", s.r() - 1)));
    }
    for p in f.iter().chain(g) {
        if !s.poly_admissible(p) {
            return Err(crate::Error::Restriction(format!("function {p} has differential outside the restriction")));
        }
    }
    let fr: Vec<&Poly> = f.iter().collect();
    let gr: Vec<&Poly> = g.iter().collect();
    let xf = s.hamiltonian_poly(&fr)?;
    let xg = s.hamiltonian_poly(&gr)?;
    let mut res = lie_bracket_poly(&xf, &xg);
    for i in 0..g.len() {
        let h = apply_vector(&xf, &g[i]);
        if h.is_constant() {
            continue;
        }
        let mut args = gr.clone();
        args[i] = &h;
        let xi = s.hamiltonian_poly(&args)?;
        res = res.iter().zip(&xi).map(|(a, b)| a.sub(b)).collect();
    }
    Ok(res)
}

pub fn commutator_identity_check(s: &NambuStructure, f: &[Poly], g: &[Poly], seed: u64) -> crate::Result<CheckReport> {
    let mut rep = CheckReport::new("commutator_identity", ANCHOR_COMMUTATOR, &s.name, seed);
    let res = commutator_residual(s, f, g)?;
    rep.evaluated = 1;
    let mag = res.iter().map(|p| p.max_abs_coeff().to_f64()).fold(0.0, f64::max);
    rep.observe(mag, || "vector residual".into());
    if res.iter().any(|p| !p.is_zero()) {
        let parts: Vec<String> = res.iter().map(|p| p.to_string()).collect();
        rep.fail(Witness {
            check: "commutator_identity".into(),
            f_slots: f.iter().map(|p| p.to_string()).collect(),
            g_slots: g.iter().map(|p| p.to_string()).collect(),
            point: None,
            value: format!("({})", parts.join(", ")),
            detail: String::new(),
        });
    }
    Ok(rep)
}

/// Classify seeded sample points; with `fi_holds` the rank must be 0 or r.
pub fn check_census(s: &NambuStructure, fi_holds: bool, opts: &CheckOptions) -> CheckReport {
    let mut rep = CheckReport::new("census", ANCHOR_CENSUS, &s.name, opts.seed);
    rep.residual.exact = false;
    let mut rng = rng_for(opts.seed, stream::CENSUS);
    let (mut regular, mut ranks) = (0usize, std::collections::BTreeSet::new());
    for _ in 0..opts.samples {
        let x = s.domain().sample(&mut rng);
        let c = s.classify_point(&x);
        rep.evaluated += 1;
        ranks.insert(c.rank);
        if c.class == PointKind::Regular {
            regular += 1;
        }
        let bad = !c.lower_bound_ok || (fi_holds && c.rank != 0 && c.rank != s.r());
        if bad {
            rep.fail(Witness {
                check: "census".into(),
                point: Some(x.iter().map(|v| format!("{v:?}")).collect()),
                value: format!("rank {}", c.rank),
                detail: if c.lower_bound_ok { "rank differs from r under FI".into() } else { "regular with rank < r".into() },
                ..Witness::default()
            });
            if rep.witnesses.len() >= opts.max_witnesses {
                break;
            }
        }
    }
    rep.note(format!("{regular} regular of {} sampled; ranks seen {:?}", rep.evaluated, ranks));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{tensor_from_exact, DomainBox, PolyTensor};
    use crate::multilinear::Variance;

    fn structure(n: usize, r: usize, terms: &[(&[usize], &str)]) -> NambuStructure {
        let mut t: PolyTensor = AltTensor::zero(n, r, Variance::Vector);
        for (ix, c) in terms {
            t.add_raw(&ix.iter().map(|i| i - 1).collect::<Vec<_>>(), Poly::parse(c).unwrap());
        }
        NambuStructure::new("t", n, r, tensor_from_exact(&t), None, DomainBox::cube(n, -2.0, 2.0)).unwrap()
    }

    #[test]
    fn filippov_direct_examples() {
        let o = CheckOptions::default();
        let canon = structure(3, 3, &[(&[1, 2, 3], "1")]);
        let rep = check_filippov_direct(&canon, &o).unwrap();
        assert!(rep.passed() && rep.residual.max == 0.0);
        let six = structure(6, 3, &[(&[1, 2, 3], "1"), (&[4, 5, 6], "1")]);
        let rep = check_filippov_direct(&six, &o).unwrap();
        assert!(!rep.passed());
        let w = &rep.witnesses[0];
        assert!(w.f_slots.iter().chain(&w.g_slots).any(|s| Poly::parse(s).unwrap().degree() == 2));
        let coords = CheckOptions { family: FamilyKind::Coords, ..o.clone() };
        assert!(check_filippov_direct(&six, &coords).unwrap().passed());
        let rem = structure(3, 3, &[(&[1, 2, 3], "x1")]);
        assert!(check_filippov_direct(&rem, &o).unwrap().passed());
    }

    #[test]
    fn lie_and_leibniz() {
        let o = CheckOptions::default();
        let canon = structure(3, 3, &[(&[1, 2, 3], "1")]);
        assert!(check_lie_derivative_criterion(&canon, &o).passed());
        assert!(check_leibniz(&canon, &o).passed());
        let six = structure(6, 3, &[(&[1, 2, 3], "1"), (&[4, 5, 6], "1")]);
        assert!(!check_lie_derivative_criterion(&six, &o).passed());
        let scaled = structure(3, 3, &[(&[1, 2, 3], "x1")]);
        assert!(check_lie_derivative_criterion(&scaled, &o).passed());
        assert!(check_leibniz(&scaled, &o).passed());
        let lam = canon.exact_tensor().unwrap().clone();
        let bad = move |fs: &[&Poly]| crate::fields::bracket_poly(&lam, fs).add(&fs[2].mul(fs[2]));
        assert!(!check_leibniz_with(&canon, &o, &bad).passed());
    }

    #[test]
    fn commutator_examples() {
        let p = |s: &str| Poly::parse(s).unwrap();
        let canon = structure(3, 3, &[(&[1, 2, 3], "1")]);
        assert!(commutator_residual(&canon, &[p("x1"), p("x2")], &[p("x2"), p("x3")]).unwrap().iter().all(Poly::is_zero));
        let scaled = structure(3, 3, &[(&[1, 2, 3], "x1")]);
        assert!(commutator_residual(&scaled, &[p("x2"), p("x3")], &[p("x1"), p("x2")]).unwrap().iter().all(Poly::is_zero));
        let six = structure(6, 3, &[(&[1, 2, 3], "1"), (&[4, 5, 6], "1")]);
        let rep = commutator_identity_check(&six, &[p("x1*x4"), p("x2")], &[p("x3"), p("x5")], 0).unwrap();
        assert!(!rep.passed());
    }

    #[test]
    fn numeric_mode_matches_exact() {
        let canon = structure(3, 3, &[(&[1, 2, 3], "x1")]);
        let lam = canon.lambda().map(|c| {
            let p = c.as_poly().unwrap().clone();
            crate::fields::ScalarField::numeric(3, "wrapped", move |x: &[f64]| {
                let (v, g, h) = p.jet2_f64(x);
                crate::fields::Jet2 { value: v, grad: g, hess: h }
            })
        });
        let s = NambuStructure::new("num", 3, 3, lam, None, DomainBox::cube(3, -2.0, 2.0)).unwrap();
        let o = CheckOptions { samples: 4, ..CheckOptions::default() };
        let rep = check_filippov_direct(&s, &o).unwrap();
        assert!(rep.passed() && !rep.residual.exact);
    }
}
