//! Partial almost r-Nambu-Poisson anchors, brackets, Hamiltonian fields and
//! the Filippov-identity verifiers.

mod checks;
mod family;
mod structural;

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    bracket_from_grads, differential, tensor_at, tensor_at_q, tensor_jet1_at, tensor_to_exact, DomainBox, Jet1,
    MultiVectorField, PolyTensor, ScalarField, VectorField,
};
use crate::linalg::{self, QMatrix};
use crate::multilinear::{subsets, AltTensor, Variance};
use crate::poly::Poly;
use crate::scalar::{Ring, Q};

pub use checks::*;
pub use family::{test_family, FamilyKind, TestFamily};
pub use structural::*;

/// Purposes for independent seeded random streams.
pub(crate) mod stream {
    pub const FAMILY: u64 = 0x66616d;
    pub const STRUCTURAL: u64 = 0x737472;
    pub const NUMERIC_FI: u64 = 0x6e6669;
    pub const CENSUS: u64 = 0x63656e;
    pub const ALGEBROID: u64 = 0x616c67;
    pub const CHART: u64 = 0x636872;
    pub const TOWER: u64 = 0x746f77;
}

pub(crate) fn rng_for(seed: u64, purpose: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ purpose)
}

/// The data `(n, r, Λ, B, box)` of a partial almost r-Nambu-Poisson anchor.
///
/// `restriction` holds the rows of `B`; their span models the fibre of the
/// cotangent subbundle on which the anchor is defined.
#[derive(Clone)]
pub struct NambuStructure {
    pub name: String,
    n: usize,
    r: usize,
    lambda: MultiVectorField,
    restriction: QMatrix,
    domain: DomainBox,
    exact: OnceLock<Option<PolyTensor>>,
    annihilator: QMatrix,
}

impl std::fmt::Debug for NambuStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NambuStructure")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("r", &self.r)
            .field("lambda", &self.lambda)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Regular,
    Singular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointClass {
    pub point: Vec<f64>,
    pub rank: usize,
    pub class: PointKind,
    /// Regular points must have rank at least r.
    pub lower_bound_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Admissibility {
    pub admissible: bool,
    /// Decided by sampling rather than symbolically.
    pub approximate: bool,
}

impl NambuStructure {
    pub fn new(
        name: &str,
        n: usize,
        r: usize,
        lambda: MultiVectorField,
        restriction: Option<QMatrix>,
        domain: DomainBox,
    ) -> Result<NambuStructure> {
        if r == 0 || r > n {
            return Err(Error::Structure(format!("order r = {r} must satisfy 1 ≤ r ≤ n = {n}")));
        }
        if lambda.n() != n || lambda.degree() != r || lambda.variance() != Variance::Vector {
            return Err(Error::Structure(format!(
                "tensor has n = {}, degree {}, {:?}; expected n = {n}, degree {r}, vector",
                lambda.n(),
                lambda.degree(),
                lambda.variance()
            )));
        }
        if domain.n() != n {
            return Err(Error::Structure(format!("domain box has dimension {} not {n}", domain.n())));
        }
        let restriction = restriction.unwrap_or_else(|| linalg::identity(n));
        if restriction.iter().any(|row| row.len() != n) {
            return Err(Error::Structure("restriction rows must have length n".into()));
        }
        let m = restriction.len();
        if m == 0 || m > n || linalg::rank(&restriction) != m {
            return Err(Error::Structure(format!("restriction must have full row rank m ≤ n, got {m} rows")));
        }
        let annihilator = linalg::nullspace(&restriction, n);
        Ok(NambuStructure {
            name: name.to_string(),
            n,
            r,
            lambda,
            restriction,
            domain,
            exact: OnceLock::new(),
            annihilator,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn lambda(&self) -> &MultiVectorField {
        &self.lambda
    }

    pub fn restriction(&self) -> &QMatrix {
        &self.restriction
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Result<NambuStructure> {
        if domain.n() != self.n {
            return Err(Error::Structure("domain dimension mismatch".into()));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn is_partial(&self) -> bool {
        self.restriction.len() < self.n || self.restriction != linalg::identity(self.n)
    }

    pub fn is_exact(&self) -> bool {
        self.exact_tensor().is_ok()
    }

    /// Polynomial tensor, when every coefficient is a polynomial.
    pub fn exact_tensor(&self) -> Result<&PolyTensor> {
        self.exact
            .get_or_init(|| tensor_to_exact(&self.lambda).ok())
            .as_ref()
            .ok_or_else(|| Error::UnsupportedMode(format!("structure `{}` has non-polynomial coefficients", self.name)))
    }

    /// Linear forms given by the rows of the restriction matrix.
    pub fn restriction_forms(&self) -> Vec<Poly> {
        self.restriction.iter().map(|row| Poly::linear(row)).collect()
    }

    pub fn covector_admissible(&self, v: &[Q]) -> bool {
        self.annihilator.iter().all(|c| c.iter().zip(v).map(|(a, b)| *a * *b).sum::<Q>().is_zero())
    }

    /// Whether `df(x)` lies in the row span of `B` for every `x`.
    pub fn admissible_fn_check(&self, f: &ScalarField) -> Admissibility {
        match f {
            ScalarField::Exact(p) => Admissibility { admissible: self.poly_admissible(p), approximate: false },
            other => {
                let mut rng = rng_for(0, stream::CENSUS);
                let ok = (0..32).all(|_| {
                    let x = self.domain.sample(&mut rng);
                    let g = other.jet1(&x);
                    self.annihilator.iter().all(|c| {
                        let s: f64 = c.iter().enumerate().map(|(j, cj)| cj.to_f64() * g.d(j)).sum();
                        s.abs() <= 1e-9 * (1.0 + g.grad.iter().map(|v| v.abs()).fold(0.0, f64::max))
                    })
                });
                Admissibility { admissible: ok, approximate: true }
            }
        }
    }

    pub fn poly_admissible(&self, p: &Poly) -> bool {
        if self.annihilator.is_empty() {
            return true;
        }
        let grad = p.gradient(self.n);
        self.annihilator.iter().all(|c| {
            let mut s = Poly::zero();
            for (j, cj) in c.iter().enumerate() {
                if !cj.is_zero() {
                    s = s.add(&grad[j].scale(*cj));
                }
            }
            s.is_zero()
        })
    }

    fn require_admissible(&self, fs: &[&ScalarField]) -> Result<()> {
        for f in fs {
            let a = self.admissible_fn_check(f);
            if !a.admissible {
                return Err(Error::Restriction(format!("function {f} has differential outside the restriction")));
            }
        }
        Ok(())
    }

    pub fn lambda_at(&self, x: &[f64]) -> AltTensor<f64> {
        tensor_at(&self.lambda, x)
    }

    pub fn lambda_jet1_at(&self, x: &[f64]) -> AltTensor<Jet1> {
        tensor_jet1_at(&self.lambda, x)
    }

    pub fn lambda_at_q(&self, x: &[Q]) -> Result<AltTensor<Q>> {
        tensor_at_q(&self.lambda, x)
    }

    /// Wedges `ℓ_{S₁} ∧ … ∧ ℓ_{S_{r−1}}` of restriction rows over all
    /// increasing (r−1)-subsets `S`.
    pub fn basis_multicovectors(&self) -> Vec<(Vec<usize>, AltTensor<Q>)> {
        let rows: Vec<AltTensor<Q>> =
            self.restriction.iter().map(|row| AltTensor::from_components(Variance::Covector, row.clone())).collect();
        subsets(rows.len(), self.r - 1)
            .into_iter()
            .map(|s| {
                let factors: Vec<AltTensor<Q>> = s.iter().map(|&i| rows[i].clone()).collect();
                let w = AltTensor::wedge_all(self.n, Variance::Covector, &factors).expect("same shape");
                (s, w)
            })
            .collect()
    }

    fn check_multicovector<R: crate::scalar::Scalar>(&self, omega: &AltTensor<R>) -> Result<()> {
        if omega.variance() != Variance::Covector || omega.degree() + 1 != self.r || omega.n() != self.n {
            return Err(Error::Arity(format!("sharp needs a degree-{} form over n = {}", self.r - 1, self.n)));
        }
        if omega.degree() == 0 {
            return Ok(());
        }
        let scale = omega.max_abs().max(1.0);
        for c in &self.annihilator {
            let v = AltTensor::from_components(Variance::Vector, c.iter().map(|q| R::from_q(*q)).collect());
            let i = v.contract_into(omega)?;
            if i.max_abs() > 1e-12 * scale {
                return Err(Error::Restriction("multi-covector is not built from restricted covectors".into()));
            }
        }
        Ok(())
    }

    /// `Λ♯(ω)` at `x`: the vector with `⟨α₀, Λ♯ω⟩ = Λ(ω, α₀)`.
    pub fn sharp(&self, omega: &AltTensor<f64>, x: &[f64]) -> Result<Vec<f64>> {
        self.check_multicovector(omega)?;
        Ok(omega.contract_into(&self.lambda_at(x))?.components())
    }

    pub fn sharp_q(&self, omega: &AltTensor<Q>, x: &[Q]) -> Result<Vec<Q>> {
        self.check_multicovector(omega)?;
        Ok(omega.contract_into(&self.lambda_at_q(x)?)?.components())
    }

    /// `{f₁, …, f_{r−1}, g}(x)`.
    pub fn bracket_eval(&self, fs: &[ScalarField], g: &ScalarField, x: &[f64]) -> Result<f64> {
        if fs.len() + 1 != self.r {
            return Err(Error::Arity(format!("bracket of order {} given {} functions", self.r, fs.len() + 1)));
        }
        self.domain.check(x)?;
        let mut all: Vec<&ScalarField> = fs.iter().collect();
        all.push(g);
        self.require_admissible(&all)?;
        let lam = self.lambda_at(x);
        let grads: Vec<Vec<f64>> = all.iter().map(|f| f.jet1(x)).map(|j| (0..self.n).map(|k| j.d(k)).collect()).collect();
        let refs: Vec<&[f64]> = grads.iter().map(|g| g.as_slice()).collect();
        Ok(bracket_from_grads(&lam, &refs))
    }

    /// Exact bracket value at a rational point.
    pub fn bracket_eval_q(&self, fs: &[&Poly], x: &[Q]) -> Result<Q> {
        if fs.len() != self.r {
            return Err(Error::Arity(format!("bracket of order {} given {} functions", self.r, fs.len())));
        }
        for f in fs {
            if !self.poly_admissible(f) {
                return Err(Error::Restriction(format!("function {f} has differential outside the restriction")));
            }
        }
        let lam = self.lambda_at_q(x)?;
        let grads: Vec<Vec<Q>> = fs.iter().map(|f| f.gradient(self.n).iter().map(|p| p.eval(x)).collect()).collect();
        let refs: Vec<&[Q]> = grads.iter().map(|g| g.as_slice()).collect();
        Ok(bracket_from_grads(&lam, &refs))
    }

    /// `{f₁, …, f_r}` as a polynomial.
    pub fn bracket_field(&self, fs: &[&Poly]) -> Result<Poly> {
        if fs.len() != self.r {
            return Err(Error::Arity(format!("bracket of order {} given {} functions", self.r, fs.len())));
        }
        for f in fs {
            if !self.poly_admissible(f) {
                return Err(Error::Restriction(format!("function {f} has differential outside the restriction")));
            }
        }
        Ok(crate::fields::bracket_poly(self.exact_tensor()?, fs))
    }

    /// `X_{f₁..f_{r−1}} = Λ♯(df₁ ∧ … ∧ df_{r−1})`, so that `X(g) = {f₁..f_{r−1}, g}`.
    pub fn hamiltonian_field(&self, fs: &[ScalarField]) -> Result<VectorField> {
        if fs.len() + 1 != self.r {
            return Err(Error::Arity(format!("Hamiltonian field needs {} functions, got {}", self.r - 1, fs.len())));
        }
        let refs: Vec<&ScalarField> = fs.iter().collect();
        self.require_admissible(&refs)?;
        let ds: Vec<AltTensor<ScalarField>> = fs.iter().map(|f| differential(f, self.n)).collect::<Result<_>>()?;
        let omega = AltTensor::wedge_all(self.n, Variance::Covector, &ds)?;
        Ok(VectorField::new(omega.contract_into(&self.lambda)?.components()))
    }

    /// Polynomial Hamiltonian field without admissibility checks.
    pub fn hamiltonian_poly(&self, fs: &[&Poly]) -> Result<Vec<Poly>> {
        let lam = self.exact_tensor()?;
        Ok(ham_from_grads(lam, &fs.iter().map(|f| f.gradient(self.n)).collect::<Vec<_>>()))
    }

    /// Contract constant restricted covectors into the leading slots.
    pub fn fixed_slot_anchor(&self, betas: &[Vec<Q>]) -> Result<NambuStructure> {
        if betas.len() >= self.r {
            return Err(Error::Arity(format!("fixing {} slots of an order-{} structure leaves order 0", betas.len(), self.r)));
        }
        for b in betas {
            if b.len() != self.n {
                return Err(Error::Arity("covector length must equal n".into()));
            }
            if !self.covector_admissible(b) {
                return Err(Error::Restriction(format!("covector {b:?} outside the restriction")));
            }
        }
        let factors: Vec<AltTensor<ScalarField>> = betas
            .iter()
            .map(|b| AltTensor::from_components(Variance::Covector, b.iter().map(|q| ScalarField::constant(*q)).collect()))
            .collect();
        let w = AltTensor::wedge_all(self.n, Variance::Covector, &factors)?;
        let lam = w.contract_into(&self.lambda)?;
        let k = self.r - betas.len();
        NambuStructure::new(&format!("{}|fixed{}", self.name, betas.len()), self.n, k, lam, Some(self.restriction.clone()), self.domain.clone())
    }

    /// The structure with tensor `h·Λ`.
    pub fn scaled(&self, h: &ScalarField) -> Result<NambuStructure> {
        let lam = self.lambda.map(|c| c.times(h));
        NambuStructure::new(&format!("{}*({h})", self.name), self.n, self.r, lam, Some(self.restriction.clone()), self.domain.clone())
    }

    /// Range dimension of the anchor at `x` (SVD threshold `1e-10 σ_max`).
    pub fn classify_point(&self, x: &[f64]) -> PointClass {
        let lam = self.lambda_at(x);
        let cols: Vec<Vec<f64>> = self
            .basis_multicovectors()
            .iter()
            .map(|(_, w)| w.map_into(|q| q.to_f64()).contract_into(&lam).expect("shapes").components())
            .collect();
        let rank = if cols.is_empty() { 0 } else { linalg::numerical_rank(&linalg::to_dmatrix(&cols), 1e-10) };
        point_class(x.to_vec(), rank, self.r)
    }

    /// Exact range dimension at a rational point.
    pub fn classify_point_exact(&self, x: &[Q]) -> Result<PointClass> {
        let lam = self.lambda_at_q(x)?;
        let cols: QMatrix = self
            .basis_multicovectors()
            .iter()
            .map(|(_, w)| w.contract_into(&lam).map(|v| v.components()))
            .collect::<Result<_>>()?;
        let rank = linalg::rank(&cols);
        Ok(point_class(x.iter().map(Q::to_f64).collect(), rank, self.r))
    }
}

fn point_class(point: Vec<f64>, rank: usize, r: usize) -> PointClass {
    let class = if rank > 0 { PointKind::Regular } else { PointKind::Singular };
    PointClass { point, rank, class, lower_bound_ok: rank == 0 || rank >= r }
}

/// `Λ♯(df₁ ∧ … ∧ df_{r−1})` from gradients, over any coefficient ring.
pub fn ham_from_grads<R: Ring>(lam: &AltTensor<R>, grads: &[Vec<R>]) -> Vec<R> {
    let n = lam.n();
    let ds: Vec<AltTensor<R>> = grads.iter().map(|g| AltTensor::from_components(Variance::Covector, g.clone())).collect();
    let omega = AltTensor::wedge_all(n, Variance::Covector, &ds).expect("same shape");
    omega.contract_into(lam).expect("shapes").components()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::tensor_from_exact;

    fn canonical(n: usize, r: usize) -> NambuStructure {
        let t: PolyTensor = AltTensor::basis(n, &(0..r).collect::<Vec<_>>(), Variance::Vector);
        NambuStructure::new("canonical", n, r, tensor_from_exact(&t), None, DomainBox::cube(n, -2.0, 2.0)).unwrap()
    }

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    fn sf(s: &str) -> ScalarField {
        ScalarField::parse(s).unwrap()
    }

    #[test]
    fn admissibility() {
        let s = canonical(3, 3);
        assert!(s.admissible_fn_check(&sf("x3^5")).admissible);
        let b = vec![vec![Q::ONE, Q::ZERO, Q::ZERO], vec![Q::ZERO, Q::ONE, Q::ZERO]];
        let t: PolyTensor = AltTensor::basis(3, &[0, 1], Variance::Vector);
        let part = NambuStructure::new("p", 3, 2, tensor_from_exact(&t), Some(b), DomainBox::cube(3, -1.0, 1.0)).unwrap();
        assert!(part.admissible_fn_check(&sf("x1*x2")).admissible);
        assert!(!part.admissible_fn_check(&sf("x3")).admissible);
        assert!(part.admissible_fn_check(&sf("7")).admissible);
    }

    #[test]
    fn sharp_examples() {
        let s = canonical(3, 3);
        let w: AltTensor<f64> = AltTensor::basis(3, &[0, 1], Variance::Covector);
        assert_eq!(s.sharp(&w, &[0.1, 0.2, 0.3]).unwrap(), vec![0.0, 0.0, 1.0]);
        let scaled = s.scaled(&sf("x1")).unwrap();
        assert_eq!(scaled.sharp(&w, &[0.0, 0.5, 0.5]).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn bracket_examples() {
        let s = canonical(3, 3);
        let (x1, x2, x3) = (p("x1"), p("x2"), p("x3"));
        assert_eq!(s.bracket_field(&[&x1, &x2, &x3]).unwrap(), Poly::one());
        assert!(s.bracket_field(&[&x1, &x1, &x3]).unwrap().is_zero());
        assert_eq!(s.bracket_field(&[&x1, &x2, &p("x1^2*x3")]).unwrap(), p("x1^2"));
        let v = s.bracket_eval(&[sf("x1"), sf("x2")], &sf("x1^2*x3"), &[0.5, 0.0, 1.0]).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_examples() {
        let s = canonical(3, 3);
        let x = s.hamiltonian_field(&[sf("x1"), sf("x2")]).unwrap();
        assert_eq!(x, VectorField::coordinate(3, 2));
        assert!(s.hamiltonian_field(&[sf("3"), sf("x2")]).unwrap().is_zero());
        let scaled = s.scaled(&sf("x1")).unwrap();
        let x = scaled.hamiltonian_field(&[sf("x2"), sf("x3")]).unwrap();
        assert_eq!(x.polys().unwrap(), vec![p("x1"), Poly::zero(), Poly::zero()]);
    }

    #[test]
    fn fixed_slots() {
        let s = canonical(3, 3);
        let f = s.fixed_slot_anchor(&[vec![Q::ONE, Q::ZERO, Q::ZERO]]).unwrap();
        let expect: PolyTensor = AltTensor::basis(3, &[1, 2], Variance::Vector);
        assert_eq!(f.exact_tensor().unwrap(), &expect);
        assert!(s.fixed_slot_anchor(&vec![vec![Q::ONE, Q::ZERO, Q::ZERO]; 3]).is_err());
        let z = s.fixed_slot_anchor(&[vec![Q::ZERO; 3]]).unwrap();
        assert!(z.exact_tensor().unwrap().is_zero());
    }

    #[test]
    fn classify() {
        let s = canonical(3, 3);
        let c = s.classify_point(&[0.3, -0.2, 0.9]);
        assert_eq!((c.rank, c.class), (3, PointKind::Regular));
        let scaled = s.scaled(&sf("x1")).unwrap();
        let c = scaled.classify_point(&[0.0, 0.4, 0.1]);
        assert_eq!((c.rank, c.class), (0, PointKind::Singular));
        let e = scaled.classify_point_exact(&[Q::ZERO, Q::ONE, Q::ONE]).unwrap();
        assert_eq!(e.rank, 0);
    }
}
