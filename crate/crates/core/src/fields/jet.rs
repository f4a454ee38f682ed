//! Forward-mode jets: value plus first (and optionally second) derivatives.

use crate::scalar::Ring;

/// Value, gradient and symmetric Hessian of a function at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
}

impl Jet2 {
    pub fn constant(n: usize, c: f64) -> Jet2 {
        Jet2 { value: c, grad: vec![0.0; n], hess: vec![vec![0.0; n]; n] }
    }

    pub fn n(&self) -> usize {
        self.grad.len()
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(r, s)| r.iter().zip(s).map(|(a, b)| a + b).collect()).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Jet2 {
        Jet2 {
            value: self.value * k,
            grad: self.grad.iter().map(|a| a * k).collect(),
            hess: self.hess.iter().map(|r| r.iter().map(|a| a * k).collect()).collect(),
        }
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let n = self.n();
        let (a, b) = (self.value, o.value);
        let grad = (0..n).map(|i| a * o.grad[i] + b * self.grad[i]).collect();
        let hess = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| a * o.hess[i][j] + b * self.hess[i][j] + self.grad[i] * o.grad[j] + o.grad[i] * self.grad[j])
                    .collect()
            })
            .collect();
        Jet2 { value: a * b, grad, hess }
    }

    /// Quotient rule up to second order.
    pub fn div(&self, o: &Jet2) -> Jet2 {
        let n = self.n();
        let b = o.value;
        let q = self.value / b;
        let gq: Vec<f64> = (0..n).map(|i| (self.grad[i] - q * o.grad[i]) / b).collect();
        let hess = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (self.hess[i][j] - q * o.hess[i][j] - gq[i] * o.grad[j] - o.grad[i] * gq[j]) / b)
                    .collect()
            })
            .collect();
        Jet2 { value: q, grad: gq, hess }
    }

    pub fn to_jet1(&self) -> Jet1 {
        Jet1 { value: self.value, grad: self.grad.clone() }
    }
}

/// Value and gradient; an empty gradient stands for a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Jet1 {
    pub fn new(value: f64, grad: Vec<f64>) -> Jet1 {
        Jet1 { value, grad }
    }

    pub fn constant(c: f64) -> Jet1 {
        Jet1 { value: c, grad: Vec::new() }
    }

    pub fn d(&self, j: usize) -> f64 {
        self.grad.get(j).copied().unwrap_or(0.0)
    }

    fn combine(&self, o: &Jet1, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let n = self.grad.len().max(o.grad.len());
        (0..n).map(|i| f(self.d(i), o.d(i))).collect()
    }
}

impl Ring for Jet1 {
    fn zero() -> Self {
        Jet1::constant(0.0)
    }
    fn one() -> Self {
        Jet1::constant(1.0)
    }
    fn is_zero(&self) -> bool {
        self.value == 0.0 && self.grad.iter().all(|g| *g == 0.0)
    }
    fn plus(&self, o: &Self) -> Self {
        Jet1 { value: self.value + o.value, grad: self.combine(o, |a, b| a + b) }
    }
    fn minus(&self, o: &Self) -> Self {
        Jet1 { value: self.value - o.value, grad: self.combine(o, |a, b| a - b) }
    }
    fn times(&self, o: &Self) -> Self {
        let (a, b) = (self.value, o.value);
        Jet1 { value: a * b, grad: self.combine(o, |da, db| a * db + b * da) }
    }
    fn negated(&self) -> Self {
        Jet1 { value: -self.value, grad: self.grad.iter().map(|g| -g).collect() }
    }
    fn from_int(v: i64) -> Self {
        Jet1::constant(v as f64)
    }
}
