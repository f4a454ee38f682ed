//! Pointwise exterior algebra: sparse alternating tensors over Rⁿ.
//!
//! Basis convention: `e_{i1} ∧ … ∧ e_{ik}` with `i1 < … < ik` is stored under
//! the multi-index `{i1..ik}` and pairs to exactly 1 with the dual basis element
//! carrying the same multi-index. The alternator carries the `1/k!`.

use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::{factorial, Ring, Scalar};

/// Strictly increasing list of 0-based coordinate indices; displayed 1-based.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(SmallVec<[u8; 8]>);

impl MultiIndex {
    pub fn empty() -> MultiIndex {
        MultiIndex(SmallVec::new())
    }

    /// From already strictly increasing 0-based indices.
    pub fn from_sorted(ix: &[usize]) -> MultiIndex {
        debug_assert!(ix.windows(2).all(|w| w[0] < w[1]), "indices must increase strictly");
        MultiIndex(ix.iter().map(|&i| i as u8).collect())
    }

    pub fn single(i: usize) -> MultiIndex {
        MultiIndex::from_sorted(&[i])
    }

    /// Sort a raw 0-based index list, returning the permutation sign, or
    /// `None` when an index repeats.
    pub fn normalize(raw: &[usize]) -> Option<(MultiIndex, i32)> {
        let mut v: SmallVec<[u8; 8]> = raw.iter().map(|&i| i as u8).collect();
        let mut sign = 1;
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((MultiIndex(v), sign))
    }

    /// Parse a 1-based comma list such as `"1,2,3"`, normalizing order.
    pub fn parse_one_based(s: &str, n: usize) -> Result<(MultiIndex, i32)> {
        let mut raw = Vec::new();
        for part in s.split(',') {
            let t = part.trim();
            let i: usize = t.parse().map_err(|_| Error::SpecSemantic(format!("bad multi-index entry `{t}` in `{s}`")))?;
            if i == 0 || i > n {
                return Err(Error::SpecSemantic(format!("multi-index entry {i} out of range 1..={n} in `{s}`")));
            }
            raw.push(i - 1);
        }
        MultiIndex::normalize(&raw).ok_or_else(|| Error::SpecSemantic(format!("repeated index in `{s}`")))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.indices().collect()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().map(|&i| i as usize)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&(i as u8))
    }

    /// Merge two disjoint multi-indices; the sign is that of the shuffle
    /// taking the concatenation `(self, other)` to increasing order.
    pub fn merge(&self, other: &MultiIndex) -> Option<(MultiIndex, i32)> {
        let mut out: SmallVec<[u8; 8]> = SmallVec::with_capacity(self.len() + other.len());
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let mut inversions = 0usize;
        while i < a.len() && j < b.len() {
            if a[i] == b[j] {
                return None;
            }
            if a[i] < b[j] {
                out.push(a[i]);
                i += 1;
            } else {
                out.push(b[j]);
                inversions += a.len() - i;
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Some((MultiIndex(out), if inversions % 2 == 0 { 1 } else { -1 }))
    }

    /// If `sub ⊆ self`, return the complement `J` and the sign with
    /// `sub ∪ J = self` ordered as `(sub, J)`.
    pub fn split_off(&self, sub: &MultiIndex) -> Option<(MultiIndex, i32)> {
        let mut rest: SmallVec<[u8; 8]> = SmallVec::new();
        let mut k = 0;
        for &x in &self.0 {
            if k < sub.0.len() && sub.0[k] == x {
                k += 1;
            } else {
                rest.push(x);
            }
        }
        if k != sub.0.len() {
            return None;
        }
        let j = MultiIndex(rest);
        let (_, s) = sub.merge(&j)?;
        Some((j, s))
    }

    /// Remove the entry at position `pos`.
    pub fn without_pos(&self, pos: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v.remove(pos);
        MultiIndex(v)
    }

    /// All increasing multi-indices of length `k` over `0..n`, lexicographic.
    pub fn all(n: usize, k: usize) -> Vec<MultiIndex> {
        subsets(n, k).into_iter().map(|s| MultiIndex::from_sorted(&s)).collect()
    }

    pub fn one_based(&self) -> String {
        self.indices().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.one_based())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.one_based())
    }
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Whether a tensor lives in `⋀ᵏ E` or `⋀ᵏ E*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Variance {
    Vector,
    Covector,
}

impl Variance {
    pub fn dual(self) -> Variance {
        match self {
            Variance::Vector => Variance::Covector,
            Variance::Covector => Variance::Vector,
        }
    }
}

/// Sparse alternating tensor in canonical form (no stored zeros).
#[derive(Clone, PartialEq)]
pub struct AltTensor<R: Ring> {
    n: usize,
    degree: usize,
    variance: Variance,
    coeffs: BTreeMap<MultiIndex, R>,
}

impl<R: Ring> fmt::Debug for AltTensor<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.variance {
            Variance::Vector => "e",
            Variance::Covector => "dx",
        };
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(|(k, c)| format!("({c:?}) {sym}{k}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<R: Ring> AltTensor<R> {
    pub fn zero(n: usize, degree: usize, variance: Variance) -> Self {
        AltTensor { n, degree, variance, coeffs: BTreeMap::new() }
    }

    pub fn scalar(n: usize, c: R) -> Self {
        let mut t = AltTensor::zero(n, 0, Variance::Vector);
        t.add_at(MultiIndex::empty(), c);
        t
    }

    pub fn basis(n: usize, ix: &[usize], variance: Variance) -> Self {
        let mut t = AltTensor::zero(n, ix.len(), variance);
        t.add_raw(ix, R::one());
        t
    }

    /// Degree-1 tensor from a dense component list.
    pub fn from_components(variance: Variance, comps: Vec<R>) -> Self {
        let n = comps.len();
        let mut t = AltTensor::zero(n, 1, variance);
        for (i, c) in comps.into_iter().enumerate() {
            t.add_at(MultiIndex::single(i), c);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &R)> {
        self.coeffs.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (MultiIndex, R)> {
        self.coeffs.into_iter()
    }

    pub fn get(&self, ix: &MultiIndex) -> R {
        self.coeffs.get(ix).cloned().unwrap_or_else(R::zero)
    }

    /// Dense components of a degree-1 tensor.
    pub fn components(&self) -> Vec<R> {
        assert_eq!(self.degree, 1, "components() needs a degree-1 tensor");
        (0..self.n).map(|i| self.get(&MultiIndex::single(i))).collect()
    }

    /// The scalar value of a degree-0 tensor.
    pub fn scalar_value(&self) -> R {
        assert_eq!(self.degree, 0, "scalar_value() needs a degree-0 tensor");
        self.get(&MultiIndex::empty())
    }

    /// Add `c` at an increasing multi-index.
    pub fn add_at(&mut self, ix: MultiIndex, c: R) {
        assert_eq!(ix.len(), self.degree, "multi-index length must equal the degree");
        assert!(ix.max_index().is_none_or(|m| m < self.n), "multi-index out of range");
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&ix) {
            Some(v) => {
                v.accumulate(&c);
                if v.is_zero() {
                    self.coeffs.remove(&ix);
                }
            }
            None => {
                self.coeffs.insert(ix, c);
            }
        }
    }

    /// Add `c` at a raw (possibly unordered) 0-based index list, applying the
    /// permutation sign; repeated indices contribute nothing.
    pub fn add_raw(&mut self, raw: &[usize], c: R) {
        if let Some((ix, s)) = MultiIndex::normalize(raw) {
            self.add_at(ix, if s > 0 { c } else { c.negated() });
        }
    }

    fn check_same(&self, o: &Self) -> Result<()> {
        if self.n != o.n || self.variance != o.variance {
            return Err(Error::Structure(format!(
                "tensors over dimension {} ({:?}) and {} ({:?})",
                self.n, self.variance, o.n, o.variance
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        if self.degree != o.degree {
            return Err(Error::Structure(format!("cannot add degrees {} and {}", self.degree, o.degree)));
        }
        let mut r = self.clone();
        for (k, v) in &o.coeffs {
            r.add_at(k.clone(), v.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.negated())
    }

    pub fn scale(&self, k: &R) -> Self {
        self.map(|c| c.times(k))
    }

    /// Apply a coefficient map, dropping results that vanish.
    pub fn map(&self, f: impl Fn(&R) -> R) -> Self {
        self.map_into(f)
    }

    pub fn map_into<S: Ring>(&self, f: impl Fn(&R) -> S) -> AltTensor<S> {
        let mut t = AltTensor::zero(self.n, self.degree, self.variance);
        for (k, v) in &self.coeffs {
            t.add_at(k.clone(), f(v));
        }
        t
    }

    pub fn try_map_into<S: Ring>(&self, f: impl Fn(&R) -> Result<S>) -> Result<AltTensor<S>> {
        let mut t = AltTensor::zero(self.n, self.degree, self.variance);
        for (k, v) in &self.coeffs {
            t.add_at(k.clone(), f(v)?);
        }
        Ok(t)
    }

    /// Exterior product. Degrees summing past `n` give the zero tensor.
    pub fn wedge(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let degree = self.degree + o.degree;
        let mut r = AltTensor::zero(self.n, degree, self.variance);
        if degree > self.n {
            return Ok(r);
        }
        for (i, a) in &self.coeffs {
            for (j, b) in &o.coeffs {
                if let Some((k, s)) = i.merge(j) {
                    let p = a.times(b);
                    r.add_at(k, if s > 0 { p } else { p.negated() });
                }
            }
        }
        Ok(r)
    }

    pub fn wedge_all(n: usize, variance: Variance, factors: &[Self]) -> Result<Self> {
        let mut acc = AltTensor::scalar(n, R::one());
        acc.variance = variance;
        for f in factors {
            acc = acc.wedge(f)?;
        }
        Ok(acc)
    }

    /// Contract `self` (degree p) into the first p slots of `target`
    /// (degree q ≥ p, opposite variance); the result has degree q − p and
    /// the variance of `target`.
    pub fn contract_into(&self, target: &Self) -> Result<Self> {
        if self.n != target.n {
            return Err(Error::Structure(format!("dimensions {} and {}", self.n, target.n)));
        }
        if self.variance == target.variance {
            return Err(Error::Structure("contraction needs opposite variances".into()));
        }
        if self.degree > target.degree {
            return Err(Error::Structure(format!(
                "cannot contract degree {} into degree {}",
                self.degree, target.degree
            )));
        }
        let mut r = AltTensor::zero(self.n, target.degree - self.degree, target.variance);
        for (k, tk) in &target.coeffs {
            for (i, si) in &self.coeffs {
                if let Some((j, s)) = k.split_off(i) {
                    let p = si.times(tk);
                    r.add_at(j, if s > 0 { p } else { p.negated() });
                }
            }
        }
        Ok(r)
    }

    /// Full pairing of equal-degree tensors of opposite variance.
    pub fn pair(&self, o: &Self) -> Result<R> {
        if self.degree != o.degree {
            return Err(Error::Arity(format!("pairing degrees {} and {}", self.degree, o.degree)));
        }
        Ok(self.contract_into(o)?.scalar_value())
    }

    /// Evaluate on `degree` arguments of the opposite variance:
    /// `t(a₁..a_k) = ⟨a₁ ∧ … ∧ a_k, t⟩`.
    pub fn eval_alt(&self, args: &[Self]) -> Result<R> {
        if args.len() != self.degree {
            return Err(Error::Arity(format!("tensor of degree {} given {} arguments", self.degree, args.len())));
        }
        for a in args {
            if a.degree != 1 {
                return Err(Error::Arity("arguments must have degree 1".into()));
            }
        }
        let w = AltTensor::wedge_all(self.n, self.variance.dual(), args)?;
        w.pair(self)
    }
}

impl<R: Scalar> AltTensor<R> {
    /// Alternation of a raw k-tensor given on ordered index tuples:
    /// `(1/k!) Σ_σ ε(σ) σ·t`, expressed in the increasing basis.
    pub fn alternate(n: usize, degree: usize, variance: Variance, raw: &[(Vec<usize>, R)]) -> Result<Self> {
        let mut t = AltTensor::zero(n, degree, variance);
        let kf = R::from_int(factorial(degree));
        for (tuple, c) in raw {
            if tuple.len() != degree {
                return Err(Error::Arity(format!("tuple {tuple:?} has length {} not {degree}", tuple.len())));
            }
            if tuple.iter().any(|&i| i >= n) {
                return Err(Error::Structure(format!("tuple {tuple:?} out of range for n = {n}")));
            }
            t.add_raw(tuple, c.divide(&kf));
        }
        Ok(t)
    }

    /// Coefficients as `(ordered tuple, value)` pairs of the full
    /// antisymmetric array, i.e. the inverse of [`AltTensor::alternate`].
    pub fn to_raw(&self) -> Vec<(Vec<usize>, R)> {
        let mut out = Vec::new();
        for (k, c) in &self.coeffs {
            let base = k.to_vec();
            for perm in permutations(self.degree) {
                let tuple: Vec<usize> = perm.iter().map(|&p| base[p]).collect();
                let (_, s) = MultiIndex::normalize(&tuple).unwrap();
                out.push((tuple, if s > 0 { c.clone() } else { c.negated() }));
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn norm2(&self) -> f64 {
        self.coeffs.values().map(|c| c.to_f64().powi(2)).sum::<f64>().sqrt()
    }
}

/// All permutations of `0..k` (Heap's algorithm order is irrelevant here).
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    fn rec(i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for j in i..cur.len() {
            cur.swap(i, j);
            rec(i + 1, cur, out);
            cur.swap(i, j);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}

/// Determinant by cofactor expansion over a commutative ring; sizes here are ≤ 6.
pub fn det<R: Ring>(m: &[Vec<R>]) -> R {
    let k = m.len();
    match k {
        0 => R::one(),
        1 => m[0][0].clone(),
        2 => m[0][0].times(&m[1][1]).minus(&m[0][1].times(&m[1][0])),
        _ => {
            let mut acc = R::zero();
            for j in 0..k {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<R>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let t = m[0][j].times(&det(&minor));
                acc = if j % 2 == 0 { acc.plus(&t) } else { acc.minus(&t) };
            }
            acc
        }
    }
}
