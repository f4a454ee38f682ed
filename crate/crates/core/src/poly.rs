//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{Ring, Q};

pub const MAX_VARS: usize = 16;

/// Exponent vector; variable `i` (0-based) is printed as `x{i+1}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(pub [u8; MAX_VARS]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; MAX_VARS]);

    pub fn var(i: usize) -> Monomial {
        let mut e = [0u8; MAX_VARS];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exp(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut e = [0u8; MAX_VARS];
        for (k, slot) in e.iter_mut().enumerate() {
            *slot = self.0[k].checked_add(o.0[k]).expect("exponent overflow");
        }
        Monomial(e)
    }

    /// Highest variable index used plus one.
    pub fn span(&self) -> usize {
        self.0.iter().rposition(|&e| e > 0).map_or(0, |p| p + 1)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", monomial_str(self))
    }
}

fn monomial_str(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, e)),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Q) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::ONE, c);
        p
    }

    pub fn one() -> Poly {
        Poly::constant(Q::ONE)
    }

    /// Coordinate function `x{i+1}`.
    pub fn var(i: usize) -> Poly {
        assert!(i < MAX_VARS, "at most {MAX_VARS} variables");
        let mut p = Poly::zero();
        p.add_term(Monomial::var(i), Q::ONE);
        p
    }

    /// Linear form Σ c_i x_i.
    pub fn linear(coeffs: &[Q]) -> Poly {
        let mut p = Poly::zero();
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::var(i), *c);
        }
        p
    }

    pub fn monomial(m: Monomial, c: Q) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert(Q::ZERO);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&Monomial::ONE).copied().unwrap_or(Q::ZERO)
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).copied().unwrap_or(Q::ZERO)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Number of leading variables needed to express the polynomial.
    pub fn span(&self) -> usize {
        self.terms.keys().map(Monomial::span).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, *c);
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, -*c);
        }
        r
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -*c)).collect() }
    }

    pub fn scale(&self, k: Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, *c * k)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        if o.terms.len() == 1 {
            let (m2, c2) = o.terms.iter().next().unwrap();
            if *m2 == Monomial::ONE {
                return self.scale(*c2);
            }
        }
        let mut r = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(m1.mul(m2), *c1 * *c2);
            }
        }
        r
    }

    /// Accumulate `a * b` into `self` without materializing the product.
    pub fn add_product(&mut self, a: &Poly, b: &Poly) {
        for (m1, c1) in &a.terms {
            for (m2, c2) in &b.terms {
                self.add_term(m1.mul(m2), *c1 * *c2);
            }
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative with respect to variable `i` (0-based).
    pub fn derivative(&self, i: usize) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = *m;
            dm.0[i] -= 1;
            r.add_term(dm, *c * Q::int(e as i128));
        }
        r
    }

    pub fn gradient(&self, n: usize) -> Vec<Poly> {
        (0..n).map(|i| self.derivative(i)).collect()
    }

    pub fn hessian(&self, n: usize) -> Vec<Vec<Poly>> {
        let g = self.gradient(n);
        g.iter().map(|gi| (0..n).map(|j| gi.derivative(j)).collect()).collect()
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        let mut acc = Q::ZERO;
        for (m, c) in &self.terms {
            let mut t = *c;
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= x[i].pow(e as u32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= x[i].powi(e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// Value, gradient and Hessian at `x`, computed in one pass.
    pub fn jet2_f64(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
        let n = x.len();
        let mut v = 0.0;
        let mut g = vec![0.0; n];
        let mut h = vec![vec![0.0; n]; n];
        let pw = |xi: f64, e: i32| if e <= 0 { 1.0 } else { xi.powi(e) };
        for (m, c) in &self.terms {
            let c = c.to_f64();
            let e: Vec<i32> = (0..n).map(|i| m.0[i] as i32).collect();
            debug_assert!(m.span() <= n, "monomial uses variables beyond the point dimension");
            let base: Vec<f64> = (0..n).map(|i| pw(x[i], e[i])).collect();
            v += c * base.iter().product::<f64>();
            for i in 0..n {
                if e[i] == 0 {
                    continue;
                }
                let di = e[i] as f64 * pw(x[i], e[i] - 1);
                let rest_i: f64 = (0..n).filter(|&k| k != i).map(|k| base[k]).product();
                g[i] += c * di * rest_i;
                if e[i] >= 2 {
                    let dii = (e[i] * (e[i] - 1)) as f64 * pw(x[i], e[i] - 2);
                    h[i][i] += c * dii * rest_i;
                }
                for j in (i + 1)..n {
                    if e[j] == 0 {
                        continue;
                    }
                    let dj = e[j] as f64 * pw(x[j], e[j] - 1);
                    let rest: f64 = (0..n).filter(|&k| k != i && k != j).map(|k| base[k]).product();
                    let val = c * di * dj * rest;
                    h[i][j] += val;
                    h[j][i] += val;
                }
            }
        }
        (v, g, h)
    }

    /// Value and gradient at `x`.
    pub fn jet1_f64(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let n = x.len();
        let mut v = 0.0;
        let mut g = vec![0.0; n];
        for (m, c) in &self.terms {
            let c = c.to_f64();
            let mut base = [1.0f64; MAX_VARS];
            for i in 0..n {
                let e = m.0[i];
                if e > 0 {
                    base[i] = x[i].powi(e as i32);
                }
            }
            v += c * base[..n].iter().product::<f64>();
            for i in 0..n {
                let e = m.0[i];
                if e == 0 {
                    continue;
                }
                let mut t = c * e as f64 * x[i].powi(e as i32 - 1);
                for (k, b) in base[..n].iter().enumerate() {
                    if k != i {
                        t *= b;
                    }
                }
                g[i] += t;
            }
        }
        (v, g)
    }

    /// Substitute `x_i = Σ_j m[i][j] y_j`; rows of `m` index the old variables.
    pub fn compose_linear(&self, m: &[Vec<Q>]) -> Poly {
        let images: Vec<Poly> = m.iter().map(|row| Poly::linear(row)).collect();
        self.substitute(&images)
    }

    /// Substitute polynomials for the variables.
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        let mut r = Poly::zero();
        let mut cache: BTreeMap<(usize, u8), Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(*c);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                assert!(i < images.len(), "substitution misses variable x{}", i + 1);
                let p = cache.entry((i, e)).or_insert_with(|| images[i].pow(e as u32));
                t = t.mul(p);
            }
            r = r.add(&t);
        }
        r
    }

    /// Evaluate only some variables, leaving the others symbolic.
    pub fn partial_eval(&self, assign: &[(usize, Q)]) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let mut mm = *m;
            let mut cc = *c;
            for &(i, v) in assign {
                let e = mm.0[i];
                if e > 0 {
                    cc *= v.pow(e as u32);
                    mm.0[i] = 0;
                }
            }
            r.add_term(mm, cc);
        }
        r
    }

    pub fn max_abs_coeff(&self) -> Q {
        self.terms.values().map(Q::abs).max().unwrap_or(Q::ZERO)
    }

    pub fn parse(s: &str) -> Result<Poly> {
        Parser::new(s).parse_all()
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    /// Canonical form: terms by descending degree, then descending exponents.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut ts: Vec<(&Monomial, &Q)> = self.terms.iter().collect();
        ts.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then_with(|| b.0.cmp(a.0)));
        for (k, (m, c)) in ts.into_iter().enumerate() {
            let neg = *c < Q::ZERO;
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if m.degree() == 0 {
                write!(f, "{a}")?;
            } else if a == Q::ONE {
                write!(f, "{}", monomial_str(m))?;
            } else {
                write!(f, "{}*{}", a, monomial_str(m))?;
            }
        }
        Ok(())
    }
}

impl FromStr for Poly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Poly> {
        Poly::parse(s)
    }
}

impl Ring for Poly {
    fn zero() -> Self {
        Poly::zero()
    }
    fn one() -> Self {
        Poly::one()
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn negated(&self) -> Self {
        self.neg()
    }
    fn from_int(v: i64) -> Self {
        Poly::constant(Q::from(v))
    }
    fn accumulate(&mut self, o: &Self) {
        for (m, c) in &o.terms {
            self.add_term(*m, *c);
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, bytes: src.as_bytes(), pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::PolyParse { input: self.src.to_string(), column: self.pos + 1, message: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn parse_all(mut self) -> Result<Poly> {
        let p = self.expr()?;
        if self.peek().is_some() {
            return Err(self.err("unexpected trailing input"));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.term()?.neg()
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.factor()?;
                    if !d.is_constant() || d.is_zero() {
                        self.pos = at;
                        return Err(self.err("division only by nonzero constants"));
                    }
                    acc = acc.scale(d.constant_term().recip());
                }
                Some(c) if c == b'x' || c == b'(' || c.is_ascii_digit() => {
                    acc = acc.mul(&self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                return Ok(self.factor()?.neg());
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                e
            }
            Some(b'x') => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(self.err("expected variable index after `x`"));
                }
                let idx: usize = self.src[start..self.pos].parse().map_err(|_| self.err("bad variable index"))?;
                if idx == 0 || idx > MAX_VARS {
                    self.pos = start;
                    return Err(self.err(format!("variable index must be in 1..={MAX_VARS}")));
                }
                Poly::var(idx - 1)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.') {
                    self.pos += 1;
                }
                let q: Q = self.src[start..self.pos].parse().map_err(|_| {
                    self.pos = start;
                    self.err("bad number")
                })?;
                Poly::constant(q)
            }
            Some(_) => return Err(self.err("unexpected character")),
            None => return Err(self.err("unexpected end of input")),
        };
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = self.src[start..self.pos].parse().map_err(|_| {
                self.pos = start;
                self.err("expected nonnegative integer exponent")
            })?;
            if e > 64 {
                self.pos = start;
                return Err(self.err("exponent too large"));
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(p("x1*x2 + 3").to_string(), "x1*x2 + 3");
        assert_eq!(p("x1^2 + 1").to_string(), "x1^2 + 1");
        assert_eq!(p("(x1 + x2)^2"), p("x1^2 + 2*x1*x2 + x2^2"));
        assert_eq!(p("x3^2/2").to_string(), "1/2*x3^2");
        assert_eq!(p("-x1 - -x2"), p("x2 - x1"));
        assert_eq!(p("2 x1"), p("2*x1"));
        assert_eq!(p("0"), Poly::zero());
    }

    #[test]
    fn parse_errors_carry_column() {
        match Poly::parse("x1 + $") {
            Err(Error::PolyParse { column, .. }) => assert_eq!(column, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Poly::parse("x0").is_err());
        assert!(Poly::parse("x1/x2").is_err());
        assert!(Poly::parse("(x1").is_err());
    }

    #[test]
    fn derivatives() {
        let f = p("x1*x2");
        assert_eq!(f.derivative(0), p("x2"));
        assert_eq!(f.derivative(1), p("x1"));
        let (v, g, h) = f.jet2_f64(&[2.0, 3.0]);
        assert_eq!(v, 6.0);
        assert_eq!(g, vec![3.0, 2.0]);
        assert_eq!(h, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let (v, g, h) = p("x1^2").jet2_f64(&[1.0]);
        assert_eq!((v, g, h), (1.0, vec![2.0], vec![vec![2.0]]));
    }

    #[test]
    fn compose() {
        let f = p("x1*x2");
        let m = vec![vec![Q::ONE, Q::ONE], vec![Q::ONE, -Q::ONE]];
        assert_eq!(f.compose_linear(&m), p("x1^2 - x2^2"));
    }
}
