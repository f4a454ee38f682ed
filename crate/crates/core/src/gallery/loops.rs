//! Discretized loops and the quadrature bracket of cylinder functionals
//! `F_f(γ) = ∫ f∘γ dt`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::fields::ScalarField;
use crate::multilinear::subsets;
use crate::nambu::{test_family, FamilyKind, NambuStructure, PointKind};
use crate::{Error, Result};

/// Samples `γ(k/N)`, `k = 0..N`, of a closed loop; weights are uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedLoop {
    points: Vec<Vec<f64>>,
}

impl DiscretizedLoop {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::Structure(format!("a loop needs at least 4 samples, got {}", points.len())));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::Structure("loop samples have different dimensions".into()));
        }
        Ok(DiscretizedLoop { points })
    }

    pub fn from_fn(samples: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        DiscretizedLoop::new((0..samples).map(|k| f(k as f64 / samples as f64)).collect())
    }

    pub fn constant(x: &[f64], samples: usize) -> Result<Self> {
        DiscretizedLoop::new(vec![x.to_vec(); samples])
    }

    /// `(c, 0.5 cos 2πt, 0.5 sin 2πt)` with first coordinate
    /// `s·sinh a / (cosh a − cos 2πt)`, whose mean is `s` and whose Fourier
    /// coefficients decay like `e^{−a|k|}`.
    pub fn kernel_loop(samples: usize, a: f64, s: f64) -> Result<Self> {
        DiscretizedLoop::from_fn(samples, |t| {
            vec![s * a.sinh() / (a.cosh() - (TAU * t).cos()), 0.5 * (TAU * t).cos(), 0.5 * (TAU * t).sin()]
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// All samples equal within `1e-12`.
    pub fn is_constant(&self) -> bool {
        let p0 = &self.points[0];
        self.points.iter().all(|p| p.iter().zip(p0).all(|(a, b)| (a - b).abs() <= 1e-12))
    }

    /// Run `self` then `other`, each on half of the circle.
    pub fn concat(&self, other: &DiscretizedLoop) -> Result<Self> {
        if self.len() != other.len() || self.n() != other.n() {
            return Err(Error::Structure("concatenated loops need equal sample counts and dimensions".into()));
        }
        DiscretizedLoop::new(self.points.iter().chain(&other.points).cloned().collect())
    }
}

/// `(1/N) Σ_k Λ_{γ(t_k)}(df₁, …, df_r)`.
pub fn loop_bracket(s: &NambuStructure, fs: &[ScalarField], gamma: &DiscretizedLoop) -> Result<f64> {
    if fs.len() != s.r() {
        return Err(Error::Arity(format!("loop bracket takes {} functions, got {}", s.r(), fs.len())));
    }
    if gamma.n() != s.n() {
        return Err(Error::Arity(format!("loop lives in R^{}, structure in R^{}", gamma.n(), s.n())));
    }
    let (head, last) = fs.split_at(s.r() - 1);
    let mut acc = 0.0;
    for x in gamma.points() {
        s.domain().check(x)?;
        acc += s.bracket_eval(head, &last[0], x)?;
    }
    Ok(acc / gamma.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopClass {
    pub class: PointKind,
    /// A family tuple with nonzero loop bracket, when one exists.
    pub witness: Option<(Vec<String>, f64)>,
    /// The family search agrees with the class.
    pub consistent: bool,
}

/// Singular iff the loop is constant at a singular point; cross-checked by
/// searching the quadratic family for a nonzero loop bracket.
pub fn classify_loop(s: &NambuStructure, gamma: &DiscretizedLoop, seed: u64) -> Result<LoopClass> {
    let class = if gamma.is_constant() && s.classify_point(&gamma.points()[0]).class == PointKind::Singular {
        PointKind::Singular
    } else {
        PointKind::Regular
    };
    let fam = test_family(s, FamilyKind::Quad, seed);
    let mut witness = None;
    for tuple in subsets(fam.len(), s.r()) {
        let fs: Vec<ScalarField> = tuple.iter().map(|&i| ScalarField::from(fam.members[i].clone())).collect();
        let v = loop_bracket(s, &fs, gamma)?;
        if v.abs() > 1e-12 {
            witness = Some((fs.iter().map(|f| f.to_string()).collect(), v));
            break;
        }
    }
    let consistent = witness.is_some() == (class == PointKind::Regular);
    Ok(LoopClass { class, witness, consistent })
}

/// Quadrature errors against a reference value and the fitted log-log
/// decay rate (positive for converging sequences).
pub fn convergence_slope(ns: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}
