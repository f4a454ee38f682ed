//! Characteristic frames, commuting frames and numeric Darboux charts at
//! regular points.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::fields::{apply_vector, bracket_poly, flow_with_jacobian, lie_bracket_poly, FlowOptions, ScalarField, VectorField};
use crate::linalg;
use crate::multilinear::{det, subsets, AltTensor, MultiIndex, Variance};
use crate::nambu::{plucker_check, rng_for, stream, NambuStructure, PointKind};
use crate::poly::Poly;
use crate::report::{fmt_point, CheckReport, Witness};
use crate::scalar::Q;
use crate::{Error, Result};

/// Functions `f₁..f_r` with `λ = Λ(df₁..df_r)`, `λ(x) = 1`, and the fields
/// `X_i = (−1)^{r−i} X_{f₁..f̂_i..f_r}` so that `df_j(X_i) = λ δ_ij`.
#[derive(Debug, Clone)]
pub struct CharacteristicFrame {
    pub center: Vec<Q>,
    /// Restriction rows used as `f_i` (0-based).
    pub rows: Vec<usize>,
    pub functions: Vec<Poly>,
    pub lambda: Poly,
    pub fields: Vec<Vec<Poly>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameIdentities {
    /// `df_j(X_i) = 0` for `j ≠ i`.
    pub orthogonality: bool,
    /// `det(df_i(X_j)) = λ^{r−1} Λ(df₁..df_r)` as polynomials.
    pub determinant: bool,
    /// `Λ(df₁..df_r)(x) = det(df_i(X_j))(x)` at the center.
    pub determinant_at_center: bool,
    /// `X₁ ∧ … ∧ X_r = λ^{r−1} Λ`.
    pub decomposition: bool,
}

impl FrameIdentities {
    pub fn all(&self) -> bool {
        self.orthogonality && self.determinant && self.determinant_at_center && self.decomposition
    }
}

fn center_f64(x: &[Q]) -> Vec<f64> {
    x.iter().map(Q::to_f64).collect()
}

fn frame_fields(s: &NambuStructure, fs: &[Poly]) -> Result<Vec<Vec<Poly>>> {
    let r = fs.len();
    (0..r)
        .map(|i| {
            let rest: Vec<&Poly> = fs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, f)| f).collect();
            let h = s.hamiltonian_poly(&rest)?;
            Ok(if (r - 1 - i) % 2 == 1 { h.iter().map(Poly::neg).collect() } else { h })
        })
        .collect()
}

/// Frame at a regular rational point, from the r-subset of restriction
/// forms maximizing `|Λ(dℓ_I)(x)|` (first in lexicographic order on ties).
pub fn characteristic_frame(s: &NambuStructure, x: &[Q]) -> Result<CharacteristicFrame> {
    let lam = s.exact_tensor()?;
    if x.len() != s.n() {
        return Err(Error::Arity(format!("point has {} coordinates, expected {}", x.len(), s.n())));
    }
    s.domain().check(&center_f64(x))?;
    let class = s.classify_point_exact(x)?;
    if class.class == PointKind::Singular {
        return Err(Error::Precondition(format!("{} is a singular point", fmt_point(&center_f64(x)))));
    }
    let lx = s.lambda_at_q(x)?;
    if s.r() >= 3 && !plucker_check(&lx, 0.0)?.decomposable {
        return Err(Error::Precondition("Λ is not decomposable at the point".into()));
    }
    let forms = s.restriction_forms();
    let mut best: Option<(Vec<usize>, Q)> = None;
    for rows in subsets(forms.len(), s.r()) {
        let fs: Vec<&Poly> = rows.iter().map(|&i| &forms[i]).collect();
        let v = bracket_poly(lam, &fs).eval(x);
        if !v.is_zero() && best.as_ref().is_none_or(|(_, b)| v.abs() > b.abs()) {
            best = Some((rows, v));
        }
    }
    let (rows, v) = best.ok_or_else(|| Error::DegenerateFrame("no restriction r-subset has nonzero bracket".into()))?;
    let mut functions: Vec<Poly> = rows.iter().map(|&i| forms[i].clone()).collect();
    let last = functions.len() - 1;
    functions[last] = functions[last].scale(v.recip());
    let refs: Vec<&Poly> = functions.iter().collect();
    let lambda = bracket_poly(lam, &refs);
    let fields = frame_fields(s, &functions)?;
    Ok(CharacteristicFrame { center: x.to_vec(), rows, functions, lambda, fields })
}

/// Exact checks of the orthogonality and determinant relations.
pub fn frame_identities(s: &NambuStructure, f: &CharacteristicFrame) -> Result<FrameIdentities> {
    let lam = s.exact_tensor()?;
    let r = f.functions.len();
    let pairing: Vec<Vec<Poly>> =
        (0..r).map(|i| (0..r).map(|j| apply_vector(&f.fields[j], &f.functions[i])).collect()).collect();
    let orthogonality = (0..r).all(|i| (0..r).all(|j| i == j || pairing[i][j].is_zero()));
    let d = det(&pairing);
    let refs: Vec<&Poly> = f.functions.iter().collect();
    let full = bracket_poly(lam, &refs);
    let determinant = d == f.lambda.pow(r as u32 - 1).mul(&full);
    let determinant_at_center = d.eval(&f.center) == full.eval(&f.center);
    let vs: Vec<AltTensor<Poly>> =
        f.fields.iter().map(|c| AltTensor::from_components(Variance::Vector, c.clone())).collect();
    let wedge = AltTensor::wedge_all(s.n(), Variance::Vector, &vs)?;
    let decomposition = wedge == lam.scale(&f.lambda.pow(r as u32 - 1));
    Ok(FrameIdentities { orthogonality, determinant, determinant_at_center, decomposition })
}

pub const ANCHOR_FRAME: &str = "df_j(X_i) = 0 for j ≠ i and Λ(df₁..df_r) = det(df_i(X_j))";

/// Frame identities at `x` as a report.
pub fn check_frame_identities(s: &NambuStructure, x: &[Q], seed: u64) -> Result<CheckReport> {
    let f = characteristic_frame(s, x)?;
    let ids = frame_identities(s, &f)?;
    let mut rep = CheckReport::new("frame_identities", ANCHOR_FRAME, &s.name, seed);
    rep.evaluated = 4;
    let named = [
        ("orthogonality", ids.orthogonality),
        ("determinant", ids.determinant),
        ("determinant_at_center", ids.determinant_at_center),
        ("decomposition", ids.decomposition),
    ];
    for (name, ok) in named {
        if !ok {
            rep.fail(Witness {
                check: "frame_identities".into(),
                f_slots: f.functions.iter().map(|p| p.to_string()).collect(),
                point: Some(x.iter().map(|q| q.to_string()).collect()),
                value: name.into(),
                detail: "identity fails".into(),
                ..Witness::default()
            });
        }
    }
    let rows: Vec<usize> = f.rows.iter().map(|i| i + 1).collect();
    rep.note(format!("functions from restriction rows {rows:?}, λ = {}", f.lambda));
    Ok(rep)
}

/// `Y_i = X_i / λ`: `df_j(Y_i) = δ_ij` wherever `λ ≠ 0`, so the `Y_i` commute.
#[derive(Debug, Clone)]
pub struct CommutingFrame {
    pub frame: CharacteristicFrame,
    pub fields: Vec<VectorField>,
}

/// Pairwise commutator residuals: `λ[X_i,X_j] − X_i(λ)X_j + X_j(λ)X_i`
/// (which is `λ³[Y_i, Y_j]`) when `scaled`, else `[X_i, X_j]`.
pub fn commutator_defects(f: &CharacteristicFrame, scaled: bool) -> Vec<((usize, usize), Vec<Poly>)> {
    let r = f.fields.len();
    let mut out = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            let (xi, xj) = (&f.fields[i], &f.fields[j]);
            let b = lie_bracket_poly(xi, xj);
            let res: Vec<Poly> = if scaled {
                let (li, lj) = (apply_vector(xi, &f.lambda), apply_vector(xj, &f.lambda));
                (0..b.len()).map(|k| f.lambda.mul(&b[k]).sub(&li.mul(&xj[k])).add(&lj.mul(&xi[k]))).collect()
            } else {
                b
            };
            out.push(((i, j), res));
        }
    }
    out
}

pub fn commuting_frame(s: &NambuStructure, x: &[Q]) -> Result<CommutingFrame> {
    let frame = characteristic_frame(s, x)?;
    if frame.lambda.eval(x).is_zero() {
        return Err(Error::DegenerateFrame("full bracket vanishes at a regular point".into()));
    }
    for ((i, j), res) in commutator_defects(&frame, true) {
        if res.iter().any(|p| !p.is_zero()) {
            return Err(Error::DegenerateFrame(format!("normalized fields {} and {} do not commute", i + 1, j + 1)));
        }
    }
    let inv = ScalarField::rational(Poly::one(), frame.lambda.clone());
    let fields = frame.fields.iter().map(|c| VectorField::from_polys(c.clone()).scale(&inv)).collect();
    Ok(CommutingFrame { frame, fields })
}

#[derive(Debug, Clone)]
enum ChartKind {
    /// `φ⁻¹(y) = x + y`.
    Identity,
    /// `φ⁻¹(u, s) = Fl_{X_r}^{u_r} ∘ Fl_{Y₁}^{u₁} ∘ … ∘ Fl_{Y_{r−1}}^{u_{r−1}}(σ(s))`.
    Flow { stages: Vec<VectorField>, opts: FlowOptions },
}

/// Chart around `center`; target coordinates `(t₁..t_r, s₁..s_{n−r})`.
#[derive(Debug, Clone)]
pub struct ChartMap {
    pub center: Vec<f64>,
    pub r: usize,
    /// Coordinate axes spanning the transversal slice.
    pub transversal: Vec<usize>,
    /// Validated box `|y_i| < half_width`.
    pub half_width: f64,
    pub condition: f64,
    kind: ChartKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartSample {
    pub chart: Vec<f64>,
    pub point: Vec<f64>,
}

fn solve(j: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = linalg::to_dmatrix(j);
    let v = nalgebra::DVector::from_column_slice(b);
    m.lu().solve(&v).map(|s| s.iter().copied().collect())
}

fn inverse_matrix(j: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let m: DMatrix<f64> = linalg::to_dmatrix(j).try_inverse()?;
    Some((0..m.nrows()).map(|i| (0..m.ncols()).map(|k| m[(i, k)]).collect()).collect())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl ChartMap {
    pub fn identity(center: Vec<f64>, r: usize, half_width: f64) -> ChartMap {
        let n = center.len();
        ChartMap { center, r, transversal: (r..n).collect(), half_width, condition: 1.0, kind: ChartKind::Identity }
    }

    pub fn n(&self) -> usize {
        self.center.len()
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, ChartKind::Identity)
    }

    /// `φ⁻¹(y)` and its Jacobian `∂φ⁻¹/∂y`.
    pub fn inverse_with_jacobian(&self, y: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.n();
        let ChartKind::Flow { stages, opts } = &self.kind else {
            let p = self.center.iter().zip(y).map(|(c, v)| c + v).collect();
            return Ok((p, linalg::q_to_f64_matrix(&linalg::identity(n))));
        };
        let r = self.r;
        let mut p = self.center.clone();
        for (k, &axis) in self.transversal.iter().enumerate() {
            p[axis] += y[r + k];
        }
        // Columns of D(current point) with respect to y.
        let mut cols: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
        for (k, &axis) in self.transversal.iter().enumerate() {
            cols[r + k][axis] = 1.0;
        }
        // Stage order: Y_{r−1}, …, Y₁, then X_r; stage k moves coordinate t_{time}.
        let order: Vec<usize> = (0..r - 1).rev().chain(std::iter::once(r - 1)).collect();
        for &t in &order {
            let field = &stages[t];
            let fl = flow_with_jacobian(field, &p, y[t], opts)?;
            for c in cols.iter_mut() {
                *c = (0..n).map(|i| (0..n).map(|j| fl.jacobian[i][j] * c[j]).sum()).collect();
            }
            p = fl.point;
            cols[t] = field.value(&p);
        }
        let jac = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
        Ok((p, jac))
    }

    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.inverse_with_jacobian(y)?.0)
    }

    /// `φ(p)` by damped Newton on `φ⁻¹(y) = p`, started from the
    /// linearization at the center.
    pub fn forward(&self, p: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if self.is_identity() {
            return Ok(p.iter().zip(&self.center).map(|(a, c)| a - c).collect());
        }
        let (_, j0) = self.inverse_with_jacobian(&vec![0.0; n])?;
        let d: Vec<f64> = p.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let mut y = solve(&j0, &d).ok_or_else(|| Error::Chart("singular Jacobian at the center".into()))?;
        let resid = |y: &[f64]| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
            let (q, j) = self.inverse_with_jacobian(y)?;
            Ok((q.iter().zip(p).map(|(a, b)| a - b).collect(), j))
        };
        let (mut f, mut j) = resid(&y)?;
        for _ in 0..40 {
            let fnorm = norm(&f);
            if fnorm < 1e-13 * (1.0 + norm(p)) {
                return Ok(y);
            }
            let step = solve(&j, &f).ok_or_else(|| Error::Chart("singular Jacobian during Newton".into()))?;
            let mut alpha = 1.0;
            loop {
                let trial: Vec<f64> = y.iter().zip(&step).map(|(a, b)| a - alpha * b).collect();
                match resid(&trial) {
                    Ok((ft, jt)) if norm(&ft) < fnorm || alpha < 1.0 / 64.0 => {
                        y = trial;
                        f = ft;
                        j = jt;
                        break;
                    }
                    Ok(_) | Err(_) if alpha >= 1.0 / 64.0 => alpha *= 0.5,
                    Ok(_) => unreachable!(),
                    Err(e) => return Err(e),
                }
            }
            if norm(&step) * alpha < 1e-15 {
                break;
            }
        }
        if norm(&f) < 1e-10 {
            Ok(y)
        } else {
            Err(Error::Chart(format!("Newton did not converge, residual {:.3e}", norm(&f))))
        }
    }

    /// `Dφ` at `φ⁻¹(y)`.
    pub fn forward_jacobian_at(&self, y: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (_, j) = self.inverse_with_jacobian(y)?;
        inverse_matrix(&j).ok_or_else(|| Error::Chart("singular chart Jacobian".into()))
    }

    /// Tabulated `(y, φ⁻¹(y))` on a `k^m` grid over the leaf coordinates
    /// and the first transversal coordinate.
    pub fn export_grid(&self, k: usize) -> Vec<ChartSample> {
        let n = self.n();
        let axes = (self.r + usize::from(n > self.r)).min(n);
        let mut out = Vec::new();
        let total = k.pow(axes as u32);
        for idx in 0..total {
            let mut y = vec![0.0; n];
            let mut rest = idx;
            for a in y.iter_mut().take(axes) {
                let i = rest % k;
                rest /= k;
                *a = if k == 1 { 0.0 } else { -0.9 * self.half_width + 1.8 * self.half_width * i as f64 / (k - 1) as f64 };
            }
            if let Ok(p) = self.inverse(&y) {
                out.push(ChartSample { chart: y, point: p });
            }
        }
        out
    }
}

/// Chart-box and flow settings.
#[derive(Debug, Clone)]
pub struct ChartOptions {
    pub seed: u64,
    pub probes: usize,
    pub roundtrip_tol: f64,
    pub min_edge: f64,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions { seed: 1, probes: 16, roundtrip_tol: 1e-7, min_edge: 1e-4 }
    }
}

/// Coordinates completing the frame at the center, by greedy pivoting.
fn transversal_axes(vectors: &[Vec<f64>], n: usize) -> Vec<usize> {
    let mut m: Vec<Vec<f64>> = vectors.to_vec();
    let mut used = vec![false; n];
    for c in 0..m.len() {
        let Some(row) = (0..n).filter(|&i| !used[i]).max_by(|&a, &b| m[c][a].abs().total_cmp(&m[c][b].abs())) else {
            break;
        };
        used[row] = true;
        let piv = m[c][row];
        if piv == 0.0 {
            continue;
        }
        for d in c + 1..m.len() {
            let k = m[d][row] / piv;
            for i in 0..n {
                m[d][i] -= k * m[c][i];
            }
        }
    }
    (0..n).filter(|&i| !used[i]).collect()
}

/// Darboux chart at a regular rational point: the box starts at a quarter of
/// the smallest domain edge and is halved until the round trip holds.
pub fn darboux_chart(s: &NambuStructure, x: &[Q], opts: &ChartOptions) -> Result<ChartMap> {
    let cf = commuting_frame(s, x)?;
    let r = s.r();
    let n = s.n();
    let center = center_f64(x);
    let mut stages: Vec<VectorField> = cf.fields[..r - 1].to_vec();
    stages.push(VectorField::from_polys(cf.frame.fields[r - 1].clone()));
    let at_center: Vec<Vec<f64>> = stages.iter().map(|f| f.value(&center)).collect();
    let transversal = transversal_axes(&at_center, n);
    let mut w = s.domain().min_edge() / 4.0;
    let mut rng = rng_for(opts.seed, stream::CHART);
    let mut last_err = String::new();
    while 2.0 * w >= opts.min_edge {
        let flow_opts = FlowOptions { step: 2.0 * w / 256.0, domain: Some(s.domain().clone()), ..FlowOptions::default() };
        let mut chart = ChartMap {
            center: center.clone(),
            r,
            transversal: transversal.clone(),
            half_width: w,
            condition: f64::NAN,
            kind: ChartKind::Flow { stages: stages.clone(), opts: flow_opts },
        };
        match probe(&chart, w, opts, &mut rng) {
            Ok(()) => {
                let (_, j0) = chart.inverse_with_jacobian(&vec![0.0; n])?;
                let sv = linalg::singular_values(&linalg::to_dmatrix(&j0));
                chart.condition = sv[0] / sv[sv.len() - 1];
                return Ok(chart);
            }
            Err(e) => last_err = e.to_string(),
        }
        w *= 0.5;
    }
    Err(Error::Chart(format!("no box down to edge {:.0e} passed the round trip; last failure: {last_err}", opts.min_edge)))
}

/// Round trip at the box corners (at most 2⁸ of them), then at seeded
/// interior points.
fn probe(chart: &ChartMap, w: f64, opts: &ChartOptions, rng: &mut impl Rng) -> Result<()> {
    let n = chart.n();
    let corners = (0u32..1 << n.min(8)).map(|bits| (0..n).map(|i| if bits >> i & 1 == 1 { w } else { -w }).collect::<Vec<f64>>());
    let interior: Vec<Vec<f64>> = (0..opts.probes).map(|_| (0..n).map(|_| rng.random_range(-w..w)).collect()).collect();
    for y in corners.chain(interior) {
        let p = chart.inverse(&y)?;
        let back = chart.forward(&p)?;
        let err = y.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err >= opts.roundtrip_tol {
            return Err(Error::Chart(format!("round trip error {err:.3e} at {}", fmt_point(&y))));
        }
    }
    Ok(())
}

/// Pushforward `(φ_*Λ)^K = Σ_I Λ^I det(Dφ[K, I])` at `φ⁻¹(y)`.
pub fn pushforward_at(s: &NambuStructure, chart: &ChartMap, y: &[f64]) -> Result<AltTensor<f64>> {
    let (p, j) = chart.inverse_with_jacobian(y)?;
    let dphi = inverse_matrix(&j).ok_or_else(|| Error::Chart("singular chart Jacobian".into()))?;
    let lam = s.lambda_at(&p);
    let n = s.n();
    let r = s.r();
    let mut out = AltTensor::zero(n, r, Variance::Vector);
    for k in subsets(n, r) {
        let mut acc = 0.0;
        for (i, c) in lam.terms() {
            let minor: Vec<Vec<f64>> = k.iter().map(|&a| i.indices().map(|b| dphi[a][b]).collect()).collect();
            acc += c * det(&minor);
        }
        out.add_at(MultiIndex::from_sorted(&k), acc);
    }
    Ok(out)
}

pub const ANCHOR_CHART: &str = "φ_*Λ = ∂/∂t₁ ∧ … ∧ ∂/∂t_r near a regular point";

/// Deviation of `φ_*Λ` from the canonical tensor at seeded points of the box.
pub fn verify_chart(s: &NambuStructure, chart: &ChartMap, samples: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("verify_chart", ANCHOR_CHART, &s.name, seed);
    rep.residual.exact = false;
    let n = s.n();
    let canon: AltTensor<f64> = AltTensor::basis(n, &(0..s.r()).collect::<Vec<_>>(), Variance::Vector);
    let mut rng = rng_for(seed, stream::CHART ^ 0x5);
    let w = chart.half_width;
    for _ in 0..samples {
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-w..w)).collect();
        rep.evaluated += 1;
        let dev = match pushforward_at(s, chart, &y) {
            Ok(t) => t.sub(&canon).map(|d| d.max_abs()).unwrap_or(f64::INFINITY),
            Err(e) => {
                rep.note(format!("evaluation failed at {}: {e}", fmt_point(&y)));
                f64::INFINITY
            }
        };
        rep.observe(dev, || fmt_point(&y));
        if !(dev < 1e-6) {
            rep.fail(Witness {
                check: "verify_chart".into(),
                point: Some(y.iter().map(|v| format!("{v:?}")).collect()),
                value: format!("{dev:.3e}"),
                detail: "pushforward deviates from the canonical tensor".into(),
                ..Witness::default()
            });
            break;
        }
    }
    rep.note(format!("box half-width {w:.4e}, condition {:.3e}", chart.condition));
    rep
}

/// Largest `|dt_i(Y_j) − δ_ij|` at the center.
pub fn coordinate_identity_defect(chart: &ChartMap, frame: &CommutingFrame) -> Result<f64> {
    let dphi = chart.forward_jacobian_at(&vec![0.0; chart.n()])?;
    let mut worst: f64 = 0.0;
    for (j, y) in frame.fields.iter().enumerate() {
        let v = y.value(&chart.center);
        for i in 0..chart.r {
            let dt: f64 = (0..chart.n()).map(|k| dphi[i][k] * v[k]).sum();
            worst = worst.max((dt - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{tensor_from_exact, DomainBox, PolyTensor};

    fn scaled(h: &str) -> NambuStructure {
        let t: PolyTensor = AltTensor::basis(3, &[0, 1, 2], Variance::Vector).scale(&Poly::parse(h).unwrap());
        NambuStructure::new("s", 3, 3, tensor_from_exact(&t), None, DomainBox::cube(3, -2.0, 2.0)).unwrap()
    }

    fn q(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&a| Q::from(a)).collect()
    }

    #[test]
    fn canonical_frame_and_identity_chart() {
        let s = scaled("1");
        let f = characteristic_frame(&s, &q(&[0, 0, 0])).unwrap();
        assert!(frame_identities(&s, &f).unwrap().all());
        assert_eq!(f.lambda, Poly::one());
        let id = ChartMap::identity(vec![0.0; 3], 3, 0.5);
        assert!(verify_chart(&s, &id, 8, 1).passed());
    }

    #[test]
    fn scaled_frame() {
        let s = scaled("x1");
        let f = characteristic_frame(&s, &q(&[1, 0, 0])).unwrap();
        assert!(frame_identities(&s, &f).unwrap().all());
        assert!(commutator_defects(&f, true).iter().all(|(_, r)| r.iter().all(Poly::is_zero)));
        assert!(commutator_defects(&f, false).iter().any(|(_, r)| r.iter().any(|p| !p.is_zero())));
        assert!(matches!(characteristic_frame(&s, &q(&[0, 1, 0])), Err(Error::Precondition(_))));
        let id = ChartMap::identity(vec![1.0, 0.0, 0.0], 3, 0.5);
        assert!(!verify_chart(&s, &id, 8, 1).passed());
    }

    #[test]
    fn scaled_chart() {
        let s = scaled("x1");
        let x = q(&[1, 0, 0]);
        let chart = darboux_chart(&s, &x, &ChartOptions::default()).unwrap();
        let rep = verify_chart(&s, &chart, 8, 3);
        assert!(rep.passed(), "{rep:?}");
        let cf = commuting_frame(&s, &x).unwrap();
        assert!(coordinate_identity_defect(&chart, &cf).unwrap() < 1e-8);
    }

    #[test]
    fn charts_on_reference_structures() {
        let t: PolyTensor = AltTensor::basis(4, &[0, 1, 2], Variance::Vector).scale(&Poly::var(0));
        let r4 = NambuStructure::new("r4", 4, 3, tensor_from_exact(&t), None, DomainBox::cube(4, -2.0, 2.0)).unwrap();
        let cases = [(scaled("x1^2 + 1"), q(&[0, 0, 0])), (scaled("1"), q(&[0, 0, 0])), (r4, q(&[1, 0, 0, 0]))];
        for (s, x) in &cases {
            let f = characteristic_frame(s, x).unwrap();
            assert!(frame_identities(s, &f).unwrap().all());
            let chart = darboux_chart(s, x, &ChartOptions::default()).unwrap();
            let rep = verify_chart(s, &chart, 32, 7);
            assert!(rep.passed(), "{rep:?}");
        }
    }
}
