//! Built-in example structures and their expected verdicts.

mod lie;
mod loops;

pub use lie::*;
pub use loops::*;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::fields::{tensor_from_exact, DomainBox, PolyTensor, ScalarField};
use crate::multilinear::{subsets, AltTensor, Variance};
use crate::nambu::NambuStructure;
use crate::poly::Poly;
use crate::scalar::Q;
use crate::{Error, Result};

/// A gallery structure with the FI verdict it is known to have.
#[derive(Debug, Clone)]
pub struct GalleryItem {
    pub structure: NambuStructure,
    pub expected_fi: bool,
    pub notes: Vec<String>,
}

/// `Λ = ∂₁ ∧ … ∧ ∂_r` on `Rⁿ`.
pub fn canonical_structure(n: usize, r: usize) -> Result<NambuStructure> {
    if r == 0 || r > n {
        return Err(Error::Structure(format!("need 1 ≤ r ≤ n, got r = {r}, n = {n}")));
    }
    let t: PolyTensor = AltTensor::basis(n, &(0..r).collect::<Vec<_>>(), Variance::Vector);
    NambuStructure::new(&format!("canonical({n},{r})"), n, r, tensor_from_exact(&t), None, DomainBox::cube(n, -2.0, 2.0))
}

/// `Λ = h ∂₁ ∧ … ∧ ∂_r`.
pub fn scaled_structure(n: usize, r: usize, h: &ScalarField) -> Result<NambuStructure> {
    h.require_poly("scaling function")?;
    let mut s = canonical_structure(n, r)?.scaled(h)?;
    s.name = format!("scaled({n},{r},{h})");
    Ok(s)
}

/// `Σ_{i<j<k} |λ_ijk|` next to the bound `Σ_{i∈I} 1/i³`, both exact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summability {
    pub sum: Q,
    pub bound: Q,
    pub holds: bool,
}

pub fn l1_summability(index_set: &[usize]) -> Summability {
    let mut sum = Q::ZERO;
    for t in subsets(index_set.len(), 3) {
        let p: i128 = t.iter().map(|&a| index_set[a] as i128).product();
        sum = sum + Q::new(1, p);
    }
    let bound = index_set.iter().fold(Q::ZERO, |acc, &i| acc + Q::new(1, (i as i128).pow(3)));
    Summability { sum, bound, holds: sum <= bound }
}

/// `Λ = Σ_{i<j<k ∈ I} (ijk)⁻¹ ∂ᵢ∧∂ⱼ∧∂ₖ` on `R^N`, restricted to `dx_I`.
/// Indices are 1-based.
pub fn l1_truncated(n: usize, index_set: &[usize]) -> Result<(NambuStructure, Summability)> {
    let mut idx = index_set.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() < 3 || idx[0] == 0 || *idx.last().unwrap() > n {
        return Err(Error::Structure(format!("index set must have at least 3 entries in 1..={n}")));
    }
    let mut t: PolyTensor = AltTensor::zero(n, 3, Variance::Vector);
    for s in subsets(idx.len(), 3) {
        let ix: Vec<usize> = s.iter().map(|&a| idx[a] - 1).collect();
        let p: i128 = s.iter().map(|&a| idx[a] as i128).product();
        t.add_raw(&ix, Poly::constant(Q::new(1, p)));
    }
    let b: Vec<Vec<Q>> = idx
        .iter()
        .map(|&i| (0..n).map(|j| if j + 1 == i { Q::ONE } else { Q::ZERO }).collect())
        .collect();
    let restriction = if idx.len() == n { None } else { Some(b) };
    let label: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
    let s = NambuStructure::new(
        &format!("l1({n};{})", label.join(",")),
        n,
        3,
        tensor_from_exact(&t),
        restriction,
        DomainBox::cube(n, -2.0, 2.0),
    )?;
    Ok((s, l1_summability(&idx)))
}

/// `{f, g} = Σ_k (∂f/∂q_k ∂g/∂p_k − ∂g/∂q_k ∂f/∂p_k)` on `(q₁..q_N, p₁..p_N)`.
pub fn sequence_poisson(n_pairs: usize) -> Result<NambuStructure> {
    if n_pairs == 0 {
        return Err(Error::Structure("need at least one (q, p) pair".into()));
    }
    let n = 2 * n_pairs;
    let mut t: PolyTensor = AltTensor::zero(n, 2, Variance::Vector);
    for k in 0..n_pairs {
        t.add_raw(&[k, n_pairs + k], Poly::one());
    }
    NambuStructure::new(&format!("seqpoisson({n_pairs})"), n, 2, tensor_from_exact(&t), None, DomainBox::cube(n, -2.0, 2.0))
}

/// Parameter overrides for named items, `key=value`.
pub type GalleryParams = BTreeMap<String, String>;

fn param<T: std::str::FromStr>(p: &GalleryParams, key: &str, default: T) -> Result<T> {
    match p.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| Error::Config(format!("gallery parameter {key} = `{v}` is not valid"))),
    }
}

fn index_list(s: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (
            a.trim().parse().map_err(|_| Error::Config(format!("bad range `{s}`")))?,
            b.trim().parse().map_err(|_| Error::Config(format!("bad range `{s}`")))?,
        );
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| Error::Config(format!("bad index list `{s}`")))).collect()
}

pub const GALLERY_NAMES: [&str; 6] = ["canonical", "scaled", "l1", "seqpoisson", "heisenberg", "loop"];

/// Instantiate a named structure. `loop` yields its host structure.
pub fn gallery(name: &str, p: &GalleryParams) -> Result<GalleryItem> {
    let item = |structure: NambuStructure, expected_fi: bool, notes: Vec<String>| GalleryItem { structure, expected_fi, notes };
    match name {
        "canonical" => Ok(item(canonical_structure(param(p, "n", 3)?, param(p, "r", 3)?)?, true, vec![])),
        "scaled" | "loop" => {
            let h = ScalarField::parse(p.get("h").map(String::as_str).unwrap_or("x1"))?;
            Ok(item(scaled_structure(param(p, "n", 3)?, param(p, "r", 3)?, &h)?, true, vec![]))
        }
        "l1" => {
            let n = param(p, "N", 6)?;
            let idx = index_list(p.get("I").map(String::as_str).unwrap_or("1..6"))?;
            let (s, cert) = l1_truncated(n, &idx)?;
            let single = idx.len() == 3;
            let note = format!("summability: Σ|λ| = {} vs Σ 1/i³ = {} ({})", cert.sum, cert.bound, if cert.holds { "holds" } else { "violated" });
            Ok(item(s, single, vec![note]))
        }
        "seqpoisson" => Ok(item(sequence_poisson(param(p, "N", 2)?)?, true, vec![])),
        "heisenberg" => {
            let times_r = param(p, "times_r", false)?;
            let lie = if times_r { LieAlgebraPresentation::heisenberg_times_r() } else { LieAlgebraPresentation::heisenberg() };
            let default = if times_r { "1,2,4" } else { "1,2,3" };
            let span: Vec<usize> = index_list(p.get("span").map(String::as_str).unwrap_or(default))?;
            let basis: Vec<Vec<Q>> = span
                .iter()
                .map(|&i| {
                    if i == 0 || i > lie.dim() {
                        Err(Error::Config(format!("span index {i} outside 1..={}", lie.dim())))
                    } else {
                        Ok((0..lie.dim()).map(|j| if j + 1 == i { Q::ONE } else { Q::ZERO }).collect())
                    }
                })
                .collect::<Result<_>>()?;
            let sub = subalgebra_check(&lie, &basis)?;
            let (s, notes) = left_invariant_structure(&lie, &basis, 1.0, 4)?;
            Ok(item(s, sub, notes))
        }
        other => Err(Error::Config(format!("unknown gallery item `{other}` (known: {})", GALLERY_NAMES.join(", ")))),
    }
}

fn params(kv: &[(&str, &str)]) -> GalleryParams {
    kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

/// The census set used to cross-check the three FI verifiers.
pub fn census() -> Result<Vec<GalleryItem>> {
    let specs: [(&str, &[(&str, &str)]); 10] = [
        ("canonical", &[("n", "3"), ("r", "3")]),
        ("canonical", &[("n", "6"), ("r", "3")]),
        ("canonical", &[("n", "2"), ("r", "2")]),
        ("scaled", &[("h", "x1")]),
        ("scaled", &[("h", "x1^2 + 1")]),
        ("l1", &[("N", "6"), ("I", "1,2,3")]),
        ("l1", &[("N", "6"), ("I", "1..6")]),
        ("seqpoisson", &[("N", "2")]),
        ("heisenberg", &[]),
        ("heisenberg", &[("times_r", "true"), ("span", "1,2,4")]),
    ];
    specs.iter().map(|(name, kv)| gallery(name, &params(kv))).collect()
}
