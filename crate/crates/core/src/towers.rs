//! Finite projective and direct towers of Nambu structures with linear links:
//! compatibility of the anchors, pointwise stratification, limit brackets.
//!
//! Levels are numbered from 1 in every public field and argument.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, QMatrix};
use crate::multilinear::{det, subsets, AltTensor, MultiIndex, Variance};
use crate::nambu::{ham_from_grads, rng_for, stream, NambuStructure, PointKind};
use crate::normal_form::{darboux_chart, ChartOptions};
use crate::poly::Poly;
use crate::report::{fmt_point, CheckReport, Witness};
use crate::scalar::{q_vec_to_f64, Q};
use crate::{Error, Result};

pub const ANCHOR_PROJECTIVE: &str = "P_i = Tδ ∘ P_{i+1} ∘ (T*δ)^{r−1}, T*δ(T♭M_i) ⊂ T♭M_{i+1}";
pub const ANCHOR_DIRECT: &str = "P_{i+1} = Tε ∘ P_i ∘ (T*ε)^{r−1} on ε(M_i), T*ε(T♭M_{i+1}) ⊂ T♭M_i";
pub const ANCHOR_PROJECTIVE_STRATA: &str = "x singular iff every x_i singular";
pub const ANCHOR_DIRECT_STRATA: &str = "x_i regular for all i ≥ k, singular for h ≤ i < k";
pub const ANCHOR_LIMIT_BRACKET: &str = "{·, …, ·}_P = lim {·, …, ·}_{P_i}";
pub const ANCHOR_TOWER_CHART: &str = "φ_*Λ = ∂/∂t₁ ∧ … ∧ ∂/∂t_r through δ₁";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TowerKind {
    /// Links `δ: R^{n_{i+1}} → R^{n_i}`, full row rank.
    Projective,
    /// Links `ε: R^{n_i} → R^{n_{i+1}}`, full column rank.
    Direct,
}

impl TowerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TowerKind::Projective => "projective",
            TowerKind::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TowerSpec {
    kind: TowerKind,
    levels: Vec<NambuStructure>,
    links: Vec<QMatrix>,
}

impl TowerSpec {
    /// `links[i]` joins levels `i + 1` and `i + 2`.
    pub fn new(kind: TowerKind, levels: Vec<NambuStructure>, links: Vec<QMatrix>) -> Result<TowerSpec> {
        if levels.is_empty() {
            return Err(Error::Structure("a tower needs at least one level".into()));
        }
        if links.len() + 1 != levels.len() {
            return Err(Error::Structure(format!("{} levels need {} links, got {}", levels.len(), levels.len() - 1, links.len())));
        }
        let r = levels[0].r();
        if let Some(s) = levels.iter().find(|s| s.r() != r) {
            return Err(Error::Structure(format!("level `{}` has order {} but the tower has order {r}", s.name, s.r())));
        }
        for (i, m) in links.iter().enumerate() {
            let (lo, hi) = (levels[i].n(), levels[i + 1].n());
            let (rows, cols) = match kind {
                TowerKind::Projective => (lo, hi),
                TowerKind::Direct => (hi, lo),
            };
            if m.len() != rows || m.iter().any(|row| row.len() != cols) {
                return Err(Error::Structure(format!("link {} must be {rows}×{cols}", i + 1)));
            }
            if linalg::rank(m) != lo {
                return Err(Error::Structure(format!("link {} has rank {} < {lo}", i + 1, linalg::rank(m))));
            }
        }
        Ok(TowerSpec { kind, levels, links })
    }

    pub fn kind(&self) -> TowerKind {
        self.kind
    }

    pub fn levels(&self) -> &[NambuStructure] {
        &self.levels
    }

    pub fn links(&self) -> &[QMatrix] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn r(&self) -> usize {
        self.levels[0].r()
    }

    fn level(&self, i: usize) -> Result<&NambuStructure> {
        if i == 0 || i > self.len() {
            return Err(Error::Arity(format!("level {i} outside 1..={}", self.len())));
        }
        Ok(&self.levels[i - 1])
    }

    /// `δ_i^j` (projective, `R^{n_j} → R^{n_i}`) or `ε_i^j` (direct,
    /// `R^{n_i} → R^{n_j}`) for `i ≤ j`.
    pub fn composite(&self, i: usize, j: usize) -> Result<QMatrix> {
        self.level(i)?;
        self.level(j)?;
        if i > j {
            return Err(Error::Arity(format!("composite link needs i ≤ j, got {i} > {j}")));
        }
        let mut m = linalg::identity(self.levels[i - 1].n());
        for k in i..j {
            m = match self.kind {
                TowerKind::Projective => linalg::matmul(&m, &self.links[k - 1]),
                TowerKind::Direct => linalg::matmul(&self.links[k - 1], &m),
            };
        }
        Ok(m)
    }
}

/// A compatible family `(x_h, …, x_L)`; `entry` is 1 for projective towers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerPoint {
    pub entry: usize,
    pub coords: Vec<Vec<Q>>,
}

impl TowerPoint {
    /// Project a top-level point down a projective tower.
    pub fn from_top(t: &TowerSpec, top: &[Q]) -> Result<TowerPoint> {
        if t.kind != TowerKind::Projective {
            return Err(Error::Precondition("from_top needs a projective tower".into()));
        }
        let top_level = t.level(t.len())?;
        if top.len() != top_level.n() {
            return Err(Error::Arity(format!("top level lives in R^{}, got {} coordinates", top_level.n(), top.len())));
        }
        let mut coords = vec![top.to_vec()];
        for link in t.links.iter().rev() {
            let below = linalg::matvec(link, coords.last().expect("nonempty"));
            coords.push(below);
        }
        coords.reverse();
        Ok(TowerPoint { entry: 1, coords })
    }

    /// Enter a direct tower at level `h` and embed upward.
    pub fn enter(t: &TowerSpec, h: usize, x: &[Q]) -> Result<TowerPoint> {
        if t.kind != TowerKind::Direct {
            return Err(Error::Precondition("enter needs a direct tower".into()));
        }
        let s = t.level(h)?;
        if x.len() != s.n() {
            return Err(Error::Arity(format!("level {h} lives in R^{}, got {} coordinates", s.n(), x.len())));
        }
        let mut coords = vec![x.to_vec()];
        for link in &t.links[h - 1..] {
            let up = linalg::matvec(link, coords.last().expect("nonempty"));
            coords.push(up);
        }
        Ok(TowerPoint { entry: h, coords })
    }

    /// Coordinates at level `i`, if the point has entered.
    pub fn at(&self, i: usize) -> Option<&[Q]> {
        if i < self.entry {
            return None;
        }
        self.coords.get(i - self.entry).map(Vec::as_slice)
    }

    /// Exact link compatibility.
    pub fn validate(&self, t: &TowerSpec) -> Result<()> {
        if self.entry == 0 || self.entry + self.coords.len() != t.len() + 1 {
            return Err(Error::Arity(format!("point covers levels {}..={}, tower has {}", self.entry, (self.entry + self.coords.len()).saturating_sub(1), t.len())));
        }
        if t.kind == TowerKind::Projective && self.entry != 1 {
            return Err(Error::Arity("projective points start at level 1".into()));
        }
        for i in self.entry..=t.len() {
            let x = self.at(i).expect("covered");
            if x.len() != t.levels[i - 1].n() {
                return Err(Error::Arity(format!("level {i} point has {} coordinates, expected {}", x.len(), t.levels[i - 1].n())));
            }
            if i == t.len() {
                break;
            }
            let y = self.at(i + 1).expect("covered");
            let ok = match t.kind {
                TowerKind::Projective => linalg::matvec(&t.links[i - 1], y) == x,
                TowerKind::Direct => linalg::matvec(&t.links[i - 1], x) == y,
            };
            if !ok {
                return Err(Error::Structure(format!("point is not link-compatible between levels {i} and {}", i + 1)));
            }
        }
        Ok(())
    }
}

fn exact(s: &NambuStructure) -> Result<&crate::fields::PolyTensor> {
    s.exact_tensor().map_err(|_| Error::Unsupported(format!("tower level `{}` needs polynomial coefficients", s.name)))
}

fn constant_grads(covs: &[Vec<Q>]) -> Vec<Vec<Poly>> {
    covs.iter().map(|c| c.iter().map(|q| Poly::constant(*q)).collect()).collect()
}

fn cov_label(c: &[Q]) -> String {
    let parts: Vec<String> = c.iter().map(|q| q.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Check `T*link` of `from` rows lands in the row span of `into`.
fn inclusion(rep: &mut CheckReport, pair: usize, from: &QMatrix, link_t: &QMatrix, into: &NambuStructure) -> bool {
    for row in from {
        rep.evaluated += 1;
        let image = linalg::matvec(link_t, row);
        if !linalg::in_row_span(into.restriction(), &image) {
            rep.fail(Witness {
                check: rep.check.clone(),
                f_slots: vec![cov_label(row)],
                value: cov_label(&image),
                detail: format!("pulled-back restriction covector leaves the target restriction across link {pair}"),
                ..Witness::default()
            });
            return false;
        }
    }
    true
}

fn record_mismatch(rep: &mut CheckReport, pair: usize, covs: &[Vec<Q>], comp: usize, diff: &Poly) {
    rep.observe(diff.max_abs_coeff().to_f64(), || format!("link {pair}, component {}", comp + 1));
    rep.fail(Witness {
        check: rep.check.clone(),
        f_slots: covs.iter().map(|c| cov_label(c)).collect(),
        value: diff.to_string(),
        detail: format!("anchor identity fails across link {pair}, component {}", comp + 1),
        ..Witness::default()
    });
}

/// Restriction inclusion and `δ·P_{i+1}(δᵀα…)(y) = P_i(α…)(δy)` as
/// polynomial identities in `y`, over basis covectors of level `i`.
pub fn check_projective_compat(t: &TowerSpec) -> Result<CheckReport> {
    if t.kind != TowerKind::Projective {
        return Err(Error::Precondition("check_projective_compat needs a projective tower".into()));
    }
    let mut rep = CheckReport::new("projective_compat", ANCHOR_PROJECTIVE, &tower_name(t), 0);
    let r = t.r();
    for (k, delta) in t.links.iter().enumerate() {
        let (lo, hi) = (&t.levels[k], &t.levels[k + 1]);
        let (lam_lo, lam_hi) = (exact(lo)?, exact(hi)?);
        let delta_t = linalg::transpose(delta);
        if !inclusion(&mut rep, k + 1, lo.restriction(), &delta_t, hi) {
            break;
        }
        let mut failed = false;
        for s in subsets(lo.restriction().len(), r - 1) {
            let alphas: Vec<Vec<Q>> = s.iter().map(|&a| lo.restriction()[a].clone()).collect();
            let pulled: Vec<Vec<Q>> = alphas.iter().map(|a| linalg::matvec(&delta_t, a)).collect();
            let upper = ham_from_grads(lam_hi, &constant_grads(&pulled));
            let lower = ham_from_grads(lam_lo, &constant_grads(&alphas));
            rep.evaluated += 1;
            for (c, row) in delta.iter().enumerate() {
                let mut lhs = Poly::zero();
                for (j, q) in row.iter().enumerate() {
                    if !q.is_zero() {
                        lhs = lhs.add(&upper[j].scale(*q));
                    }
                }
                let rhs = lower[c].compose_linear(delta);
                let diff = lhs.sub(&rhs);
                if !diff.is_zero() {
                    record_mismatch(&mut rep, k + 1, &alphas, c, &diff);
                    failed = true;
                    break;
                }
            }
            if failed {
                break;
            }
        }
        if failed {
            break;
        }
    }
    Ok(rep)
}

/// Restriction inclusion and `P_{i+1}(β…)(εx) = ε·P_i(εᵀβ…)(x)` as
/// polynomial identities in `x`, over basis covectors of level `i + 1`.
pub fn check_direct_compat(t: &TowerSpec) -> Result<CheckReport> {
    if t.kind != TowerKind::Direct {
        return Err(Error::Precondition("check_direct_compat needs a direct tower".into()));
    }
    let mut rep = CheckReport::new("direct_compat", ANCHOR_DIRECT, &tower_name(t), 0);
    let r = t.r();
    for (k, eps) in t.links.iter().enumerate() {
        let (lo, hi) = (&t.levels[k], &t.levels[k + 1]);
        let (lam_lo, lam_hi) = (exact(lo)?, exact(hi)?);
        let eps_t = linalg::transpose(eps);
        if !inclusion(&mut rep, k + 1, hi.restriction(), &eps_t, lo) {
            break;
        }
        let mut failed = false;
        for s in subsets(hi.restriction().len(), r - 1) {
            let betas: Vec<Vec<Q>> = s.iter().map(|&a| hi.restriction()[a].clone()).collect();
            let pulled: Vec<Vec<Q>> = betas.iter().map(|b| linalg::matvec(&eps_t, b)).collect();
            let upper = ham_from_grads(lam_hi, &constant_grads(&betas));
            let lower = ham_from_grads(lam_lo, &constant_grads(&pulled));
            rep.evaluated += 1;
            for (c, row) in eps.iter().enumerate() {
                let lhs = upper[c].compose_linear(eps);
                let mut rhs = Poly::zero();
                for (j, q) in row.iter().enumerate() {
                    if !q.is_zero() {
                        rhs = rhs.add(&lower[j].scale(*q));
                    }
                }
                let diff = lhs.sub(&rhs);
                if !diff.is_zero() {
                    record_mismatch(&mut rep, k + 1, &betas, c, &diff);
                    failed = true;
                    break;
                }
            }
            if failed {
                break;
            }
        }
        if failed {
            break;
        }
    }
    Ok(rep)
}

pub fn check_compat(t: &TowerSpec) -> Result<CheckReport> {
    match t.kind {
        TowerKind::Projective => check_projective_compat(t),
        TowerKind::Direct => check_direct_compat(t),
    }
}

pub fn tower_name(t: &TowerSpec) -> String {
    let names: Vec<&str> = t.levels.iter().map(|s| s.name.as_str()).collect();
    format!("{}[{}]", t.kind.as_str(), names.join(" | "))
}

/// Pointwise class of a projective tower point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TowerPointKind {
    Regular,
    Singular,
    /// Levels disagree; never expected on compatible towers.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveClass {
    pub class: TowerPointKind,
    /// `(level, rank)` pairs.
    pub ranks: Vec<(usize, usize)>,
    /// Ranks never decrease up the tower.
    pub monotone: bool,
}

impl ProjectiveClass {
    pub fn violation(&self) -> bool {
        self.class == TowerPointKind::Mixed || !self.monotone
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectClass {
    pub entry: usize,
    pub ranks: Vec<(usize, usize)>,
    /// Minimal `k ≥ h` with every level from `k` on regular; `None` when the
    /// point is singular at every level.
    pub stratum: Option<usize>,
    /// Once regular, regular at every higher level.
    pub monotone: bool,
}

fn level_ranks(t: &TowerSpec, p: &TowerPoint) -> Result<Vec<(usize, usize)>> {
    p.validate(t)?;
    (p.entry..=t.len())
        .map(|i| Ok((i, t.levels[i - 1].classify_point_exact(p.at(i).expect("covered"))?.rank)))
        .collect()
}

/// First sampled point of the box where `s` is regular.
pub fn find_regular_point(s: &NambuStructure, samples: usize, seed: u64) -> Option<Vec<Q>> {
    let mut rng = rng_for(seed, stream::TOWER ^ 0x1);
    for _ in 0..samples {
        let x = sample_rational(s, &mut rng);
        if s.classify_point_exact(&x).map(|c| c.class == PointKind::Regular).unwrap_or(false) {
            return Some(x);
        }
    }
    None
}

fn sample_rational(s: &NambuStructure, rng: &mut impl Rng) -> Vec<Q> {
    let d = s.domain();
    let c = d.center();
    let half = d.min_edge() / 2.0;
    // Grid of step 1/16 inside the box, kept off the boundary.
    let steps = ((half * 16.0).floor() as i64 - 1).max(0);
    c.iter()
        .map(|&ci| Q::from_f64_approx(ci, 16) + Q::new(rng.random_range(-steps..=steps) as i128, 16))
        .collect()
}

fn require_regular_base(t: &TowerSpec, entry: usize) -> Result<()> {
    if find_regular_point(&t.levels[entry - 1], 64, 0).is_none() {
        return Err(Error::Precondition(format!("level {entry} shows no regular point among 64 samples")));
    }
    Ok(())
}

pub fn classify_tower_point_projective(t: &TowerSpec, p: &TowerPoint) -> Result<ProjectiveClass> {
    if t.kind != TowerKind::Projective {
        return Err(Error::Precondition("projective classification needs a projective tower".into()));
    }
    require_regular_base(t, 1)?;
    let ranks = level_ranks(t, p)?;
    let regular = ranks.iter().filter(|(_, k)| *k > 0).count();
    let class = if regular == ranks.len() {
        TowerPointKind::Regular
    } else if regular == 0 {
        TowerPointKind::Singular
    } else {
        TowerPointKind::Mixed
    };
    let monotone = ranks.windows(2).all(|w| w[0].1 <= w[1].1);
    Ok(ProjectiveClass { class, ranks, monotone })
}

pub fn classify_tower_point_direct(t: &TowerSpec, p: &TowerPoint) -> Result<DirectClass> {
    if t.kind != TowerKind::Direct {
        return Err(Error::Precondition("direct classification needs a direct tower".into()));
    }
    require_regular_base(t, 1)?;
    let ranks = level_ranks(t, p)?;
    let first = ranks.iter().position(|(_, k)| *k > 0);
    let monotone = first.map_or(true, |f| ranks[f..].iter().all(|(_, k)| *k > 0));
    let stratum = ranks.iter().rposition(|(_, k)| *k == 0).map_or(Some(p.entry), |last| ranks.get(last + 1).map(|(i, _)| *i));
    Ok(DirectClass { entry: p.entry, ranks, stratum, monotone })
}

/// Bracket of cylinder functions `g ∘ δ_i` at a projective tower point,
/// evaluated at level `i`.
pub fn limit_bracket_eval(t: &TowerSpec, level: usize, gs: &[Poly], p: &TowerPoint) -> Result<Q> {
    if t.kind != TowerKind::Projective {
        return Err(Error::Precondition("limit brackets need a projective tower".into()));
    }
    p.validate(t)?;
    let s = t.level(level)?;
    let refs: Vec<&Poly> = gs.iter().collect();
    s.bracket_eval_q(&refs, p.at(level).expect("projective points cover every level"))
}

/// The same bracket after pulling the functions back to each level
/// `j = level..=L`; all entries agree on compatible towers.
pub fn limit_bracket_levels(t: &TowerSpec, level: usize, gs: &[Poly], p: &TowerPoint) -> Result<Vec<(usize, Q)>> {
    let mut out = vec![(level, limit_bracket_eval(t, level, gs, p)?)];
    for j in level + 1..=t.len() {
        let m = t.composite(level, j)?;
        let pulled: Vec<Poly> = gs.iter().map(|g| g.compose_linear(&m)).collect();
        out.push((j, limit_bracket_eval(t, j, &pulled, p)?));
    }
    Ok(out)
}

/// Pushforward of the top-level tensor through `φ ∘ δ_1^L`, where `φ` is the
/// level-1 Darboux chart at `x`, compared with `∂_{t₁} ∧ … ∧ ∂_{t_r}` at
/// seeded chart points lifted to the top level.
pub fn check_tower_chart(t: &TowerSpec, x: &[Q], samples: usize, seed: u64) -> Result<CheckReport> {
    if t.kind != TowerKind::Projective {
        return Err(Error::Precondition("the tower chart check needs a projective tower".into()));
    }
    let base = &t.levels[0];
    let top = &t.levels[t.len() - 1];
    let mut rep = CheckReport::new("tower_chart", ANCHOR_TOWER_CHART, &tower_name(t), seed);
    rep.residual.exact = false;
    let chart = darboux_chart(base, x, &ChartOptions { seed, ..ChartOptions::default() })?;
    let delta = t.composite(1, t.len())?;
    let delta_t = linalg::transpose(&delta);
    let gram = linalg::inverse(&linalg::matmul(&delta, &delta_t)).ok_or_else(|| Error::Structure("composite link lost rank".into()))?;
    let right = linalg::q_to_f64_matrix(&linalg::matmul(&delta_t, &gram));
    let kernel = linalg::q_to_f64_matrix(&linalg::nullspace(&delta, top.n()));
    let delta_f = linalg::q_to_f64_matrix(&delta);
    let (n1, nl, r) = (base.n(), top.n(), t.r());
    let canon: AltTensor<f64> = AltTensor::basis(n1, &(0..r).collect::<Vec<_>>(), Variance::Vector);
    let mut rng = rng_for(seed, stream::TOWER ^ 0x2);
    let w = chart.half_width;
    for _ in 0..samples {
        let c: Vec<f64> = (0..n1).map(|_| rng.random_range(-w..w)).collect();
        let p = chart.inverse(&c)?;
        let mut y: Vec<f64> = (0..nl).map(|i| (0..n1).map(|j| right[i][j] * p[j]).sum()).collect();
        for k in &kernel {
            let a: f64 = rng.random_range(-0.5..0.5);
            for (yi, ki) in y.iter_mut().zip(k) {
                *yi += a * ki;
            }
        }
        let dphi = chart.forward_jacobian_at(&c)?;
        let m: Vec<Vec<f64>> = (0..n1).map(|a| (0..nl).map(|b| (0..n1).map(|k| dphi[a][k] * delta_f[k][b]).sum()).collect()).collect();
        let lam = top.lambda_at(&y);
        let mut push = AltTensor::zero(n1, r, Variance::Vector);
        for ks in subsets(n1, r) {
            let mut acc = 0.0;
            for (ix, v) in lam.terms() {
                let minor: Vec<Vec<f64>> = ks.iter().map(|&a| ix.indices().map(|b| m[a][b]).collect()).collect();
                acc += v * det(&minor);
            }
            push.add_at(MultiIndex::from_sorted(&ks), acc);
        }
        let dev = push.sub(&canon)?.max_abs();
        rep.evaluated += 1;
        rep.observe(dev, || fmt_point(&y));
        if !(dev < 1e-6) {
            rep.fail(Witness {
                check: "tower_chart".into(),
                point: Some(y.iter().map(|v| format!("{v:?}")).collect()),
                value: format!("{dev:.3e}"),
                detail: "pushed-forward limit tensor is not straightened".into(),
                ..Witness::default()
            });
            break;
        }
    }
    rep.note(format!("level-1 chart at {}, half-width {w:.4e}", fmt_point(&q_vec_to_f64(x))));
    Ok(rep)
}

/// Compatibility, stratification invariants over sampled points, limit
/// bracket consistency and (projective) the chart check.
pub fn tower_battery(t: &TowerSpec, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut out = vec![check_compat(t)?];
    out[0].seed = seed;
    let compat = out[0].passed();
    let name = tower_name(t);
    let mut rng = rng_for(seed, stream::TOWER);
    let mut points = Vec::new();
    match t.kind {
        TowerKind::Projective => {
            for _ in 0..samples {
                points.push(TowerPoint::from_top(t, &sample_rational(&t.levels[t.len() - 1], &mut rng))?);
            }
        }
        TowerKind::Direct => {
            for k in 0..samples {
                let h = 1 + k % t.len();
                points.push(TowerPoint::enter(t, h, &sample_rational(&t.levels[h - 1], &mut rng))?);
            }
        }
    }
    let anchor = match t.kind {
        TowerKind::Projective => ANCHOR_PROJECTIVE_STRATA,
        TowerKind::Direct => ANCHOR_DIRECT_STRATA,
    };
    let mut strata = CheckReport::new("stratification", anchor, &name, seed);
    if find_regular_point(&t.levels[0], 64, 0).is_none() {
        out.push(CheckReport::unsupported("stratification", anchor, &name, seed, "level 1 shows no regular point"));
    } else {
        let mut counts = std::collections::BTreeMap::<String, usize>::new();
        for p in &points {
            strata.evaluated += 1;
            let (label, bad, ranks) = match t.kind {
                TowerKind::Projective => {
                    let c = classify_tower_point_projective(t, p)?;
                    (format!("{:?}", c.class).to_lowercase(), c.violation(), c.ranks)
                }
                TowerKind::Direct => {
                    let c = classify_tower_point_direct(t, p)?;
                    (c.stratum.map_or("singular".to_string(), |k| format!("stratum {k}")), !c.monotone, c.ranks)
                }
            };
            *counts.entry(label).or_default() += 1;
            if bad {
                let x = q_vec_to_f64(p.at(p.entry).expect("entered"));
                strata.fail(Witness {
                    check: "stratification".into(),
                    point: Some(x.iter().map(|v| format!("{v:?}")).collect()),
                    value: format!("{ranks:?}"),
                    detail: format!("level ranks violate the stratification (entry level {})", p.entry),
                    ..Witness::default()
                });
                break;
            }
        }
        let tally: Vec<String> = counts.iter().map(|(k, v)| format!("{k}: {v}")).collect();
        strata.note(format!("classes {}", tally.join(", ")));
        if !compat {
            strata.note("compatibility failed; the stratification is not guaranteed");
        }
        out.push(strata);
    }
    if t.kind == TowerKind::Projective {
        let mut lb = CheckReport::new("limit_bracket", ANCHOR_LIMIT_BRACKET, &name, seed);
        let base = &t.levels[0];
        let coords: Vec<Poly> = base.restriction_forms();
        for p in &points {
            for s in subsets(coords.len(), t.r()) {
                let gs: Vec<Poly> = s.iter().map(|&i| coords[i].clone()).collect();
                let vals = limit_bracket_levels(t, 1, &gs, p)?;
                lb.evaluated += 1;
                let v0 = vals[0].1;
                if let Some((j, v)) = vals.iter().find(|(_, v)| *v != v0) {
                    lb.observe((*v - v0).abs().to_f64(), || format!("level {j}"));
                    lb.fail(Witness {
                        check: "limit_bracket".into(),
                        f_slots: gs.iter().map(|g| g.to_string()).collect(),
                        point: Some(q_vec_to_f64(p.at(1).expect("covered")).iter().map(|v| format!("{v:?}")).collect()),
                        value: format!("{v0} at level 1 vs {v} at level {j}"),
                        detail: "pull-back level changes the bracket".into(),
                        ..Witness::default()
                    });
                    break;
                }
            }
            if !lb.passed() {
                break;
            }
        }
        out.push(lb);
        let chart = match find_regular_point(base, 64, seed) {
            None => CheckReport::unsupported("tower_chart", ANCHOR_TOWER_CHART, &name, seed, "level 1 shows no regular point"),
            Some(x) => match check_tower_chart(t, &x, samples, seed) {
                Ok(r) => r,
                Err(e @ (Error::Unsupported(_) | Error::Chart(_) | Error::Precondition(_) | Error::DegenerateFrame(_))) => {
                    CheckReport::unsupported("tower_chart", ANCHOR_TOWER_CHART, &name, seed, &e.to_string())
                }
                Err(e) => return Err(e),
            },
        };
        out.push(chart);
    }
    Ok(out)
}

/// Levels `R^{n₀+1} … R^{n₀+L}` with drop-last (projective) or
/// zero-padding (direct) links; `coeff(i)` is the coefficient of
/// `∂₁ ∧ … ∧ ∂_r` at level `i`.
pub fn coordinate_tower(kind: TowerKind, n0: usize, r: usize, levels: usize, coeff: impl Fn(usize) -> Poly) -> Result<TowerSpec> {
    let mut ls = Vec::new();
    for i in 1..=levels {
        let n = n0 + i;
        let t: crate::fields::PolyTensor = AltTensor::basis(n, &(0..r).collect::<Vec<_>>(), Variance::Vector).scale(&coeff(i));
        ls.push(NambuStructure::new(
            &format!("level{i}"),
            n,
            r,
            crate::fields::tensor_from_exact(&t),
            None,
            crate::fields::DomainBox::cube(n, -2.0, 2.0),
        )?);
    }
    let links = (1..levels)
        .map(|i| {
            let n = n0 + i;
            let drop: QMatrix = (0..n).map(|a| (0..n + 1).map(|b| if a == b { Q::ONE } else { Q::ZERO }).collect()).collect();
            match kind {
                TowerKind::Projective => drop,
                TowerKind::Direct => linalg::transpose(&drop),
            }
        })
        .collect();
    TowerSpec::new(kind, ls, links)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&a| Q::from(a)).collect()
    }

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    fn squares(i: usize) -> Poly {
        (4..=3 + i).fold(Poly::zero(), |acc, j| acc.add(&Poly::var(j - 1).pow(2)))
    }

    #[test]
    fn projective_compat_examples() {
        let t = coordinate_tower(TowerKind::Projective, 3, 3, 3, |_| Poly::one()).unwrap();
        assert!(check_projective_compat(&t).unwrap().passed());
        let bad = coordinate_tower(TowerKind::Projective, 3, 3, 3, |i| if i == 2 { p("x4") } else { Poly::one() }).unwrap();
        let rep = check_projective_compat(&bad).unwrap();
        assert!(!rep.passed());
        assert!(!rep.witnesses[0].f_slots.is_empty());
        let single = coordinate_tower(TowerKind::Projective, 3, 3, 1, |_| Poly::one()).unwrap();
        let rep = check_projective_compat(&single).unwrap();
        assert!(rep.passed() && rep.evaluated == 0);
        let rank_deficient = vec![vec![Q::ZERO; 5]; 4];
        let ls = t.levels()[..2].to_vec();
        assert!(matches!(TowerSpec::new(TowerKind::Projective, ls, vec![rank_deficient]), Err(Error::Structure(_))));
    }

    #[test]
    fn direct_compat_examples() {
        let t = coordinate_tower(TowerKind::Direct, 3, 3, 3, squares).unwrap();
        assert!(check_direct_compat(&t).unwrap().passed());
        let bad = coordinate_tower(TowerKind::Direct, 3, 3, 3, |i| if i == 2 { squares(2).add(&Poly::one()) } else { squares(i) }).unwrap();
        assert!(!check_direct_compat(&bad).unwrap().passed());
        let canon = coordinate_tower(TowerKind::Direct, 3, 3, 4, |_| Poly::one()).unwrap();
        assert!(check_direct_compat(&canon).unwrap().passed());
        assert!(check_projective_compat(&canon).is_err());
    }

    #[test]
    fn projective_classification() {
        let t = coordinate_tower(TowerKind::Projective, 3, 3, 3, |_| Poly::one()).unwrap();
        let pt = TowerPoint::from_top(&t, &q(&[1, 0, -1, 1, 1, 0])).unwrap();
        let c = classify_tower_point_projective(&t, &pt).unwrap();
        assert_eq!(c.class, TowerPointKind::Regular);
        let h = coordinate_tower(TowerKind::Projective, 3, 3, 3, |_| p("x1")).unwrap();
        assert!(check_projective_compat(&h).unwrap().passed());
        let at0 = classify_tower_point_projective(&h, &TowerPoint::from_top(&h, &q(&[0, 1, 1, 1, 1, 1])).unwrap()).unwrap();
        assert_eq!(at0.class, TowerPointKind::Singular);
        assert!(at0.ranks.iter().all(|(_, k)| *k == 0));
        let at1 = classify_tower_point_projective(&h, &TowerPoint::from_top(&h, &q(&[1, 0, 0, 0, 0, 0])).unwrap()).unwrap();
        assert_eq!(at1.class, TowerPointKind::Regular);
        assert_eq!(at1.ranks, vec![(1, 3), (2, 3), (3, 3)]);
        assert!(!at1.violation());
        let mut broken = pt.clone();
        broken.coords[0][0] = Q::from(7);
        assert!(broken.validate(&t).is_err());
    }

    #[test]
    fn direct_classification() {
        let t = coordinate_tower(TowerKind::Direct, 3, 3, 3, squares).unwrap();
        let pt = TowerPoint::enter(&t, 2, &q(&[1, 1, 1, 0, 1])).unwrap();
        let c = classify_tower_point_direct(&t, &pt).unwrap();
        assert_eq!(c.stratum, Some(2));
        assert_eq!(c.ranks, vec![(2, 3), (3, 3)]);
        let zero = TowerPoint::enter(&t, 1, &q(&[1, 1, 1, 0])).unwrap();
        let c = classify_tower_point_direct(&t, &zero).unwrap();
        assert_eq!(c.stratum, None);
        assert!(c.ranks.iter().all(|(_, k)| *k == 0) && c.monotone);
        let canon = coordinate_tower(TowerKind::Direct, 3, 3, 3, |_| Poly::one()).unwrap();
        for h in 1..=3 {
            let x = vec![Q::ONE; 3 + h];
            assert_eq!(classify_tower_point_direct(&canon, &TowerPoint::enter(&canon, h, &x).unwrap()).unwrap().stratum, Some(h));
        }
    }

    #[test]
    fn limit_brackets() {
        let t = coordinate_tower(TowerKind::Projective, 3, 3, 3, |_| Poly::one()).unwrap();
        let pt = TowerPoint::from_top(&t, &q(&[1, 0, -1, 1, 1, 0])).unwrap();
        let xs = [Poly::var(0), Poly::var(1), Poly::var(2)];
        assert_eq!(limit_bracket_eval(&t, 1, &xs, &pt).unwrap(), Q::ONE);
        let vals = limit_bracket_levels(&t, 1, &[p("x1^2 + x4"), p("x2*x3"), p("x3 - x1")], &pt).unwrap();
        assert_eq!(vals.len(), 3);
        assert!(vals.iter().all(|(_, v)| *v == vals[0].1));
        assert_eq!(limit_bracket_eval(&t, 1, &[p("x1"), Poly::constant(Q::from(2)), p("x3")], &pt).unwrap(), Q::ZERO);
    }

    #[test]
    fn batteries() {
        let t = coordinate_tower(TowerKind::Projective, 3, 3, 3, |_| Poly::one()).unwrap();
        let reps = tower_battery(&t, 8, 1).unwrap();
        assert_eq!(reps.len(), 4);
        assert!(reps.iter().all(|r| r.passed()), "{reps:#?}");
        let d = coordinate_tower(TowerKind::Direct, 3, 3, 3, squares).unwrap();
        let reps = tower_battery(&d, 8, 1).unwrap();
        assert!(reps.iter().all(|r| r.passed()), "{reps:#?}");
        let bad = coordinate_tower(TowerKind::Projective, 3, 3, 3, |i| if i == 2 { p("x4") } else { Poly::one() }).unwrap();
        assert!(!tower_battery(&bad, 8, 1).unwrap()[0].passed());
    }
}
