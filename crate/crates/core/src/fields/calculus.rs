//! Exterior derivative, Lie brackets, interior products and Lie derivatives.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::multilinear::{det, AltTensor, MultiIndex, Variance};
use crate::poly::Poly;
use crate::scalar::Ring;

use super::{FormField, Jet2, MultiVectorField, NumericFn, PolyTensor, ScalarField, VectorField};

/// Gradient one-form of a polynomial.
pub fn d_poly(f: &Poly, n: usize) -> PolyTensor {
    AltTensor::from_components(Variance::Covector, f.gradient(n))
}

/// Exterior derivative of a polynomial form.
pub fn d_form_poly(a: &PolyTensor) -> PolyTensor {
    assert_eq!(a.variance(), Variance::Covector, "exterior derivative needs a form");
    let n = a.n();
    let mut out = AltTensor::zero(n, a.degree() + 1, Variance::Covector);
    if a.degree() + 1 > n {
        return out;
    }
    for (ix, c) in a.terms() {
        for j in 0..n {
            if ix.contains(j) {
                continue;
            }
            let dc = c.derivative(j);
            if dc.is_zero() {
                continue;
            }
            let (k, s) = MultiIndex::single(j).merge(ix).unwrap();
            out.add_at(k, if s > 0 { dc } else { dc.neg() });
        }
    }
    out
}

/// `df` for a scalar field; numeric fields give numeric coefficients whose
/// Hessian slot is unavailable (filled with NaN).
pub fn differential(f: &ScalarField, n: usize) -> Result<FormField> {
    match f {
        ScalarField::Exact(p) => Ok(super::tensor_from_exact(&d_poly(p, n))),
        ScalarField::Rational { num, den } => {
            let den2 = den.mul(den);
            let comps = (0..n)
                .map(|j| ScalarField::rational(num.derivative(j).mul(den).sub(&num.mul(&den.derivative(j))), den2.clone()))
                .collect();
            Ok(AltTensor::from_components(Variance::Covector, comps))
        }
        ScalarField::Numeric(nf) => {
            let comps = (0..n)
                .map(|j| {
                    let f = nf.f.clone();
                    ScalarField::Numeric(NumericFn {
                        n,
                        label: format!("d{}({})", j + 1, nf.label),
                        f: Arc::new(move |x: &[f64]| {
                            let jet = f(x);
                            Jet2 { value: jet.grad[j], grad: jet.hess[j].clone(), hess: vec![vec![f64::NAN; n]; n] }
                        }),
                    })
                })
                .collect();
            Ok(AltTensor::from_components(Variance::Covector, comps))
        }
    }
}

/// Exterior derivative of a form field; polynomial coefficients only.
pub fn d_form(a: &FormField) -> Result<FormField> {
    let p = a.try_map_into(|c| c.require_poly("exterior derivative").cloned())?;
    Ok(super::tensor_from_exact(&d_form_poly(&p)))
}

/// `X(f) = Σ_j X^j ∂_j f`.
pub fn apply_vector(x: &[Poly], f: &Poly) -> Poly {
    let mut out = Poly::zero();
    for (j, xj) in x.iter().enumerate() {
        if xj.is_zero() {
            continue;
        }
        let d = f.derivative(j);
        if !d.is_zero() {
            out.add_product(xj, &d);
        }
    }
    out
}

pub fn lie_bracket_poly(x: &[Poly], y: &[Poly]) -> Vec<Poly> {
    (0..x.len()).map(|i| apply_vector(x, &y[i]).sub(&apply_vector(y, &x[i]))).collect()
}

/// `[X, Y]^i = Σ_j (X^j ∂_j Y^i − Y^j ∂_j X^i)`, symbolically.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if x.n() != y.n() {
        return Err(Error::Structure(format!("vector fields over dimensions {} and {}", x.n(), y.n())));
    }
    Ok(VectorField::from_polys(lie_bracket_poly(&x.polys()?, &y.polys()?)))
}

/// Value of `[X, Y]` at a point from 1-jets; works for every field mode.
pub fn lie_bracket_at(x: &VectorField, y: &VectorField, p: &[f64]) -> Vec<f64> {
    let (xv, xj) = x.jacobian(p);
    let (yv, yj) = y.jacobian(p);
    (0..x.n()).map(|i| (0..x.n()).map(|j| xv[j] * yj[i][j] - yv[j] * xj[i][j]).sum()).collect()
}

/// `Λ(dg₁, …, dg_r) = Σ_K Λ_K det(∂_{K_j} g_i)` from gradients.
pub fn bracket_from_grads<R: Ring>(lam: &AltTensor<R>, grads: &[&[R]]) -> R {
    let r = lam.degree();
    assert_eq!(grads.len(), r, "bracket needs {r} arguments");
    let mut acc = R::zero();
    for (k, c) in lam.terms() {
        let ks: Vec<usize> = k.to_vec();
        let m: Vec<Vec<R>> = grads.iter().map(|g| ks.iter().map(|&j| g[j].clone()).collect()).collect();
        let d = det(&m);
        if !d.is_zero() {
            acc = acc.plus(&c.times(&d));
        }
    }
    acc
}

/// `Λ(dg₁, …, dg_r)` for polynomial data.
pub fn bracket_poly(lam: &PolyTensor, gs: &[&Poly]) -> Poly {
    let n = lam.n();
    let grads: Vec<Vec<Poly>> = gs.iter().map(|g| g.gradient(n)).collect();
    let refs: Vec<&[Poly]> = grads.iter().map(|g| g.as_slice()).collect();
    bracket_from_grads(lam, &refs)
}

/// Contract a vector field into the first slot of a form.
pub fn interior_vector_poly(x: &[Poly], a: &PolyTensor) -> PolyTensor {
    if a.degree() == 0 {
        return AltTensor::zero(a.n(), 0, Variance::Covector);
    }
    let xv = AltTensor::from_components(Variance::Vector, x.to_vec());
    xv.contract_into(a).expect("interior product shapes")
}

/// `L_X α = i_X dα + d(i_X α)`.
pub fn lie_derivative_form_poly(x: &[Poly], a: &PolyTensor) -> PolyTensor {
    let t1 = interior_vector_poly(x, &d_form_poly(a));
    let ia = interior_vector_poly(x, a);
    let t2 = if a.degree() == 0 {
        AltTensor::zero(a.n(), a.degree(), Variance::Covector)
    } else {
        d_form_poly(&ia)
    };
    t1.add(&t2).expect("Lie derivative degrees")
}

pub fn lie_derivative_form(x: &VectorField, a: &FormField) -> Result<FormField> {
    let xp = x.polys()?;
    let ap = super::tensor_to_exact(a)?;
    Ok(super::tensor_from_exact(&lie_derivative_form_poly(&xp, &ap)))
}

/// `(L_X Λ)(dg₁..dg_r) = X(Λ(dg₁..dg_r)) − Σ_i Λ(dg₁, …, d(X g_i), …, dg_r)`.
pub fn lie_derivative_multivector_poly(x: &[Poly], lam: &PolyTensor, gs: &[&Poly]) -> Poly {
    let mut out = apply_vector(x, &bracket_poly(lam, gs));
    for i in 0..gs.len() {
        let h = apply_vector(x, gs[i]);
        if h.is_constant() {
            continue;
        }
        let mut args: Vec<&Poly> = gs.to_vec();
        args[i] = &h;
        out = out.sub(&bracket_poly(lam, &args));
    }
    out
}

pub fn lie_derivative_multivector(x: &VectorField, lam: &MultiVectorField, gs: &[ScalarField]) -> Result<ScalarField> {
    let xp = x.polys()?;
    let lp = super::tensor_to_exact(lam)?;
    let gp: Vec<&Poly> = gs.iter().map(|g| g.require_poly("Lie derivative test function")).collect::<Result<_>>()?;
    if gp.len() != lp.degree() {
        return Err(Error::Arity(format!("{} test functions for a degree-{} tensor", gp.len(), lp.degree())));
    }
    Ok(ScalarField::Exact(lie_derivative_multivector_poly(&xp, &lp, &gp)))
}

/// Full Lie derivative `L_X Λ` of a polynomial multivector, coefficientwise:
/// `(L_X Λ)^K = X(Λ^K) − Σ_slots Λ(…, dX^{K_s}, …)`.
pub fn lie_derivative_tensor_poly(x: &[Poly], lam: &PolyTensor) -> PolyTensor {
    let n = lam.n();
    let r = lam.degree();
    let mut out = AltTensor::zero(n, r, Variance::Vector);
    for k in MultiIndex::all(n, r) {
        let coords: Vec<Poly> = k.indices().map(Poly::var).collect();
        let refs: Vec<&Poly> = coords.iter().collect();
        out.add_at(k, lie_derivative_multivector_poly(x, lam, &refs));
    }
    out
}
