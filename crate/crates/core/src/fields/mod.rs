//! Scalar, vector, form and multivector fields on boxes in Rⁿ.

mod calculus;
mod flow;
mod jet;

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::multilinear::AltTensor;
use crate::poly::Poly;
use crate::scalar::{Ring, Q};

pub use calculus::*;
pub use flow::{flow, flow_with_jacobian, FlowOptions, FlowResult};
pub use jet::{Jet1, Jet2};

/// Axis-aligned open box `∏ (lo_i, hi_i)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<DomainBox> {
        if lo.len() != hi.len() {
            return Err(Error::Structure("domain bounds differ in length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Structure("domain box needs lo < hi in every coordinate".into()));
        }
        Ok(DomainBox { lo, hi })
    }

    pub fn cube(n: usize, a: f64, b: f64) -> DomainBox {
        DomainBox { lo: vec![a; n], hi: vec![b; n] }
    }

    pub fn n(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n() && x.iter().enumerate().all(|(i, v)| *v > self.lo[i] && *v < self.hi[i])
    }

    pub fn contains_q(&self, x: &[Q]) -> bool {
        self.contains(&x.iter().map(Q::to_f64).collect::<Vec<_>>())
    }

    pub fn min_edge(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Uniform sample strictly inside the box.
    pub fn sample<G: Rng>(&self, rng: &mut G) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| {
                let u: f64 = rng.random_range(0.02..0.98);
                a + u * (b - a)
            })
            .collect()
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain { point: x.to_vec() })
        }
    }
}

pub type JetFn = Arc<dyn Fn(&[f64]) -> Jet2 + Send + Sync>;

/// Black-box evaluator returning 2-jets.
#[derive(Clone)]
pub struct NumericFn {
    pub n: usize,
    pub label: String,
    pub f: JetFn,
}

impl fmt::Debug for NumericFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<numeric {}>", self.label)
    }
}

/// A smooth function on a box: exact polynomial, exact rational function,
/// or numeric jet evaluator.
#[derive(Clone)]
pub enum ScalarField {
    Exact(Poly),
    Rational { num: Poly, den: Poly },
    Numeric(NumericFn),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Exact(p) => write!(f, "{p}"),
            ScalarField::Rational { num, den } => write!(f, "({num})/({den})"),
            ScalarField::Numeric(nf) => write!(f, "{nf:?}"),
        }
    }
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ScalarField::Exact(a), ScalarField::Exact(b)) => a == b,
            (ScalarField::Rational { num: a, den: b }, ScalarField::Rational { num: c, den: d }) => a.mul(d) == c.mul(b),
            (ScalarField::Exact(a), ScalarField::Rational { num, den })
            | (ScalarField::Rational { num, den }, ScalarField::Exact(a)) => a.mul(den) == *num,
            _ => false,
        }
    }
}

impl From<Poly> for ScalarField {
    fn from(p: Poly) -> Self {
        ScalarField::Exact(p)
    }
}

impl ScalarField {
    pub fn constant(c: Q) -> ScalarField {
        ScalarField::Exact(Poly::constant(c))
    }

    pub fn var(i: usize) -> ScalarField {
        ScalarField::Exact(Poly::var(i))
    }

    pub fn parse(s: &str) -> Result<ScalarField> {
        Ok(ScalarField::Exact(Poly::parse(s)?))
    }

    pub fn numeric(n: usize, label: &str, f: impl Fn(&[f64]) -> Jet2 + Send + Sync + 'static) -> ScalarField {
        ScalarField::Numeric(NumericFn { n, label: label.to_string(), f: Arc::new(f) })
    }

    pub fn rational(num: Poly, den: Poly) -> ScalarField {
        assert!(!den.is_zero(), "zero denominator");
        if den.is_constant() {
            return ScalarField::Exact(num.scale(den.constant_term().recip()));
        }
        ScalarField::Rational { num, den }
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        match self {
            ScalarField::Exact(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ScalarField::Exact(_))
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, ScalarField::Numeric(_))
    }

    pub fn require_poly(&self, what: &str) -> Result<&Poly> {
        self.as_poly().ok_or_else(|| Error::UnsupportedMode(format!("{what} needs polynomial data, got {self}")))
    }

    fn as_fraction(&self) -> Option<(Poly, Poly)> {
        match self {
            ScalarField::Exact(p) => Some((p.clone(), Poly::one())),
            ScalarField::Rational { num, den } => Some((num.clone(), den.clone())),
            ScalarField::Numeric(_) => None,
        }
    }

    pub fn jet2(&self, x: &[f64]) -> Jet2 {
        match self {
            ScalarField::Exact(p) => {
                let (value, grad, hess) = p.jet2_f64(x);
                Jet2 { value, grad, hess }
            }
            ScalarField::Rational { num, den } => {
                let a = ScalarField::Exact(num.clone()).jet2(x);
                let b = ScalarField::Exact(den.clone()).jet2(x);
                a.div(&b)
            }
            ScalarField::Numeric(nf) => (nf.f)(x),
        }
    }

    pub fn jet1(&self, x: &[f64]) -> Jet1 {
        match self {
            ScalarField::Exact(p) => {
                let (v, g) = p.jet1_f64(x);
                Jet1::new(v, g)
            }
            ScalarField::Rational { num, den } => {
                let (a, ga) = num.jet1_f64(x);
                let (b, gb) = den.jet1_f64(x);
                let q = a / b;
                Jet1::new(q, ga.iter().zip(&gb).map(|(da, db)| (da - q * db) / b).collect())
            }
            ScalarField::Numeric(nf) => (nf.f)(x).to_jet1(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Exact(p) => p.eval_f64(x),
            ScalarField::Rational { num, den } => num.eval_f64(x) / den.eval_f64(x),
            ScalarField::Numeric(nf) => (nf.f)(x).value,
        }
    }

    /// Exact value at a rational point (numeric fields are refused).
    pub fn value_q(&self, x: &[Q]) -> Result<Q> {
        match self {
            ScalarField::Exact(p) => Ok(p.eval(x)),
            ScalarField::Rational { num, den } => {
                let d = den.eval(x);
                if d.is_zero() {
                    return Err(Error::Domain { point: x.iter().map(Q::to_f64).collect() });
                }
                Ok(num.eval(x) / d)
            }
            ScalarField::Numeric(_) => Err(Error::UnsupportedMode("exact evaluation of a numeric field".into())),
        }
    }

    fn jet_fn(&self) -> JetFn {
        match self {
            ScalarField::Numeric(nf) => nf.f.clone(),
            other => {
                let me = other.clone();
                Arc::new(move |x: &[f64]| me.jet2(x))
            }
        }
    }

    fn numeric_dim(&self, other: &ScalarField) -> usize {
        match (self, other) {
            (ScalarField::Numeric(a), _) => a.n,
            (_, ScalarField::Numeric(b)) => b.n,
            _ => 0,
        }
    }

    fn combine_numeric(&self, o: &ScalarField, label: &str, op: fn(&Jet2, &Jet2) -> Jet2) -> ScalarField {
        let (fa, fb) = (self.jet_fn(), o.jet_fn());
        let n = self.numeric_dim(o);
        ScalarField::Numeric(NumericFn { n, label: label.to_string(), f: Arc::new(move |x: &[f64]| op(&fa(x), &fb(x))) })
    }
}

/// Jet of `f` at `x`, refusing points outside the domain box.
pub fn eval_scalar(f: &ScalarField, x: &[f64], domain: &DomainBox) -> Result<Jet2> {
    domain.check(x)?;
    Ok(f.jet2(x))
}

impl Ring for ScalarField {
    fn zero() -> Self {
        ScalarField::Exact(Poly::zero())
    }
    fn one() -> Self {
        ScalarField::Exact(Poly::one())
    }
    fn is_zero(&self) -> bool {
        match self {
            ScalarField::Exact(p) => p.is_zero(),
            ScalarField::Rational { num, .. } => num.is_zero(),
            ScalarField::Numeric(_) => false,
        }
    }
    fn plus(&self, o: &Self) -> Self {
        match (self, o) {
            (ScalarField::Exact(a), ScalarField::Exact(b)) => ScalarField::Exact(a.add(b)),
            _ => match (self.as_fraction(), o.as_fraction()) {
                (Some((a, b)), Some((c, d))) => {
                    if b == d {
                        ScalarField::rational(a.add(&c), b)
                    } else {
                        ScalarField::rational(a.mul(&d).add(&c.mul(&b)), b.mul(&d))
                    }
                }
                _ => self.combine_numeric(o, "sum", Jet2::add),
            },
        }
    }
    fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negated())
    }
    fn times(&self, o: &Self) -> Self {
        match (self, o) {
            (ScalarField::Exact(a), ScalarField::Exact(b)) => ScalarField::Exact(a.mul(b)),
            _ => match (self.as_fraction(), o.as_fraction()) {
                (Some((a, b)), Some((c, d))) => ScalarField::rational(a.mul(&c), b.mul(&d)),
                _ => self.combine_numeric(o, "product", Jet2::mul),
            },
        }
    }
    fn negated(&self) -> Self {
        match self {
            ScalarField::Exact(p) => ScalarField::Exact(p.neg()),
            ScalarField::Rational { num, den } => ScalarField::Rational { num: num.neg(), den: den.clone() },
            ScalarField::Numeric(nf) => {
                let f = nf.f.clone();
                ScalarField::Numeric(NumericFn { n: nf.n, label: format!("-{}", nf.label), f: Arc::new(move |x: &[f64]| f(x).scale(-1.0)) })
            }
        }
    }
    fn from_int(v: i64) -> Self {
        ScalarField::constant(Q::from(v))
    }
}

/// Degree-k form field with scalar-field coefficients.
pub type FormField = AltTensor<ScalarField>;
/// Degree-r multivector field with scalar-field coefficients.
pub type MultiVectorField = AltTensor<ScalarField>;
/// Polynomial-coefficient tensors used by the exact engine.
pub type PolyTensor = AltTensor<Poly>;

pub fn tensor_to_exact(t: &AltTensor<ScalarField>) -> Result<PolyTensor> {
    t.try_map_into(|c| c.require_poly("exact tensor").cloned())
}

pub fn tensor_from_exact(t: &PolyTensor) -> AltTensor<ScalarField> {
    t.map_into(|p| ScalarField::Exact(p.clone()))
}

pub fn tensor_at(t: &AltTensor<ScalarField>, x: &[f64]) -> AltTensor<f64> {
    t.map_into(|c| c.value(x))
}

pub fn tensor_jet1_at(t: &AltTensor<ScalarField>, x: &[f64]) -> AltTensor<Jet1> {
    t.map_into(|c| c.jet1(x))
}

pub fn tensor_at_q(t: &AltTensor<ScalarField>, x: &[Q]) -> Result<AltTensor<Q>> {
    t.try_map_into(|c| c.value_q(x))
}

/// A vector field with one scalar-field component per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(comps: Vec<ScalarField>) -> VectorField {
        VectorField { comps }
    }

    pub fn from_polys(p: Vec<Poly>) -> VectorField {
        VectorField { comps: p.into_iter().map(ScalarField::Exact).collect() }
    }

    pub fn zero(n: usize) -> VectorField {
        VectorField { comps: vec![ScalarField::zero(); n] }
    }

    /// Constant coordinate field `∂_i`.
    pub fn coordinate(n: usize, i: usize) -> VectorField {
        let mut v = VectorField::zero(n);
        v.comps[i] = ScalarField::one();
        v
    }

    pub fn n(&self) -> usize {
        self.comps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Ring::is_zero)
    }

    pub fn polys(&self) -> Result<Vec<Poly>> {
        self.comps.iter().map(|c| c.require_poly("vector field").cloned()).collect()
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.value(x)).collect()
    }

    /// Value and Jacobian `J[i][j] = ∂_j X^i` at `x`.
    pub fn jacobian(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = x.len();
        let mut v = Vec::with_capacity(self.n());
        let mut j = Vec::with_capacity(self.n());
        for c in &self.comps {
            let jet = c.jet1(x);
            v.push(jet.value);
            j.push((0..n).map(|k| jet.d(k)).collect());
        }
        (v, j)
    }

    pub fn scale(&self, f: &ScalarField) -> VectorField {
        VectorField { comps: self.comps.iter().map(|c| c.times(f)).collect() }
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        VectorField { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.plus(b)).collect() }
    }

    pub fn sub(&self, o: &VectorField) -> VectorField {
        VectorField { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.minus(b)).collect() }
    }

    /// As a degree-1 multivector field.
    pub fn to_tensor(&self) -> MultiVectorField {
        AltTensor::from_components(crate::multilinear::Variance::Vector, self.comps.clone())
    }

    pub fn display(&self) -> String {
        let parts: Vec<String> = self
            .comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({c})∂{}", i + 1))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_scalar_examples() {
        let dom = DomainBox::cube(2, -10.0, 10.0);
        let f = ScalarField::parse("x1*x2").unwrap();
        let j = eval_scalar(&f, &[2.0, 3.0], &dom).unwrap();
        assert_eq!(j.value, 6.0);
        assert_eq!(j.grad, vec![3.0, 2.0]);
        assert_eq!(j.hess[0][1], 1.0);
        let c = ScalarField::parse("5").unwrap();
        let j = eval_scalar(&c, &[1.0, -4.0], &dom).unwrap();
        assert_eq!(j.grad, vec![0.0, 0.0]);
        assert!(eval_scalar(&f, &[20.0, 0.0], &dom).is_err());
    }

    #[test]
    fn mixed_ring_ops() {
        let num = ScalarField::numeric(1, "exp", |x: &[f64]| {
            let e = x[0].exp();
            Jet2 { value: e, grad: vec![e], hess: vec![vec![e]] }
        });
        let p = ScalarField::parse("x1^2").unwrap();
        let prod = num.times(&p);
        let j = prod.jet2(&[1.0]);
        let e = 1f64.exp();
        assert!((j.value - e).abs() < 1e-14);
        assert!((j.grad[0] - 3.0 * e).abs() < 1e-13);
        assert!((j.hess[0][0] - 7.0 * e).abs() < 1e-12);
        let r = ScalarField::rational(Poly::one(), Poly::parse("x1").unwrap());
        let s = r.times(&ScalarField::parse("x1").unwrap());
        assert_eq!(s, ScalarField::one());
    }
}
