//! TOML specification files for structures and towers.
//!
//! ```toml
//! version = 1
//! expect_fail = ["filippov_direct"]
//!
//! [structure]
//! name = "scaled"
//! n = 3
//! r = 3
//!
//! [structure.tensor]
//! "1,2,3" = "x1"
//! ```
//!
//! A structure is either inline (`n`, `r`, `tensor`, optional
//! `restriction` rows and `domain`) or a gallery reference (`gallery` plus
//! string `params`). Rationals may be written as integers, decimals or
//! `"p/q"` strings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fields::{tensor_from_exact, DomainBox, PolyTensor};
use crate::gallery::gallery;
use crate::multilinear::{AltTensor, MultiIndex, Variance};
use crate::nambu::NambuStructure;
use crate::poly::Poly;
use crate::scalar::Q;
use crate::towers::{TowerKind, TowerSpec};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub version: u32,
    /// Check names whose failure is expected.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect_fail: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<TowerDef>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gallery: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction: Option<Vec<Vec<Q>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    /// One-based multi-index → polynomial coefficient.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tensor: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainDef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDef {
    pub lo: Vec<Q>,
    pub hi: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerDef {
    pub kind: TowerKind,
    /// `links[i]` joins levels `i + 1` and `i + 2`.
    #[serde(default)]
    pub links: Vec<Vec<Vec<Q>>>,
    pub levels: Vec<StructureDef>,
}

/// What a spec file describes.
#[derive(Debug, Clone)]
pub enum SpecSubject {
    Structure(NambuStructure),
    Tower(TowerSpec),
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
    (line, column)
}

/// Line of the first occurrence of `needle`, for semantic diagnostics.
fn locate(src: &str, needle: &str) -> String {
    match src.find(needle) {
        Some(off) => {
            let (line, column) = line_col(src, off);
            format!("line {line}, column {column}: ")
        }
        None => String::new(),
    }
}

impl SpecFile {
    /// Parse and validate; syntax errors carry the line and column.
    pub fn parse_str(src: &str) -> Result<SpecFile> {
        let spec: SpecFile = toml::from_str(src).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(src, s.start));
            Error::SpecSyntax { line, column, message: e.message().trim().to_string() }
        })?;
        spec.validate().map_err(|e| match e {
            Error::SpecSemantic(m) => {
                let hint = m.split('`').nth(1).map(|k| locate(src, k)).unwrap_or_default();
                Error::SpecSemantic(format!("{hint}{m}"))
            }
            other => Error::SpecSemantic(other.to_string()),
        })?;
        Ok(spec)
    }

    pub fn parse_file(path: &Path) -> Result<SpecFile> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        SpecFile::parse_str(&src)
    }

    /// Canonical TOML text; `parse_str(emit(s)) == s`.
    pub fn emit(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize spec: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.subject().map(|_| ())
    }

    /// Build the structure or tower.
    pub fn subject(&self) -> Result<SpecSubject> {
        if self.version != FORMAT_VERSION {
            return Err(Error::SpecSemantic(format!("format version {} is not supported (expected {FORMAT_VERSION})", self.version)));
        }
        match (&self.structure, &self.tower) {
            (Some(s), None) => Ok(SpecSubject::Structure(build_structure(s)?)),
            (None, Some(t)) => Ok(SpecSubject::Tower(build_tower(t)?)),
            (Some(_), Some(_)) => Err(Error::SpecSemantic("a spec holds either [structure] or [tower], not both".into())),
            (None, None) => Err(Error::SpecSemantic("a spec needs a [structure] or [tower] table".into())),
        }
    }

    pub fn structure(&self) -> Result<NambuStructure> {
        match self.subject()? {
            SpecSubject::Structure(s) => Ok(s),
            SpecSubject::Tower(_) => Err(Error::Config("this command needs a structure spec, got a tower".into())),
        }
    }

    pub fn tower(&self) -> Result<TowerSpec> {
        match self.subject()? {
            SpecSubject::Tower(t) => Ok(t),
            SpecSubject::Structure(_) => Err(Error::Config("this command needs a tower spec, got a structure".into())),
        }
    }
}

fn build_structure(d: &StructureDef) -> Result<NambuStructure> {
    if let Some(g) = &d.gallery {
        if d.n.is_some() || d.r.is_some() || !d.tensor.is_empty() || d.restriction.is_some() {
            return Err(Error::SpecSemantic(format!("gallery reference `{g}` cannot also give n, r, tensor or restriction")));
        }
        let mut s = gallery(g, &d.params).map_err(|e| Error::SpecSemantic(format!("gallery item `{g}`: {e}")))?.structure;
        if let Some(dom) = &d.domain {
            let n = s.n();
            s = s.with_domain(domain(dom, n)?)?;
        }
        if let Some(name) = &d.name {
            s.name = name.clone();
        }
        return Ok(s);
    }
    if !d.params.is_empty() {
        return Err(Error::SpecSemantic("`params` only applies to gallery references".into()));
    }
    let (Some(n), Some(r)) = (d.n, d.r) else {
        return Err(Error::SpecSemantic("inline structures need `n` and `r`".into()));
    };
    if r == 0 || r > n || n > crate::poly::MAX_VARS {
        return Err(Error::SpecSemantic(format!("need 1 ≤ r ≤ n ≤ {}, got n = {n}, r = {r}", crate::poly::MAX_VARS)));
    }
    let mut t: PolyTensor = AltTensor::zero(n, r, Variance::Vector);
    let mut seen: BTreeMap<MultiIndex, &str> = BTreeMap::new();
    for (key, coeff) in &d.tensor {
        let (ix, sign) = MultiIndex::parse_one_based(key, n)?;
        if ix.len() != r {
            return Err(Error::SpecSemantic(format!("multi-index `{key}` has {} entries, expected r = {r}", ix.len())));
        }
        if let Some(prev) = seen.insert(ix.clone(), key) {
            return Err(Error::SpecSemantic(format!("multi-index `{key}` repeats `{prev}` up to order")));
        }
        let p = Poly::parse(coeff).map_err(|e| Error::SpecSemantic(format!("coefficient of `{key}`: {e}")))?;
        if p.span() > n {
            return Err(Error::SpecSemantic(format!("coefficient of `{key}` uses x{} beyond n = {n}", p.span())));
        }
        t.add_at(ix, if sign < 0 { p.neg() } else { p });
    }
    let dom = match &d.domain {
        Some(dd) => domain(dd, n)?,
        None => DomainBox::cube(n, -2.0, 2.0),
    };
    let name = d.name.clone().unwrap_or_else(|| format!("inline({n},{r})"));
    NambuStructure::new(&name, n, r, tensor_from_exact(&t), d.restriction.clone(), dom).map_err(|e| Error::SpecSemantic(e.to_string()))
}

fn domain(d: &DomainDef, n: usize) -> Result<DomainBox> {
    if d.lo.len() != n || d.hi.len() != n {
        return Err(Error::SpecSemantic(format!("domain bounds must have {n} entries")));
    }
    DomainBox::new(d.lo.iter().map(Q::to_f64).collect(), d.hi.iter().map(Q::to_f64).collect())
        .map_err(|e| Error::SpecSemantic(e.to_string()))
}

fn build_tower(d: &TowerDef) -> Result<TowerSpec> {
    let levels: Vec<NambuStructure> = d
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| build_structure(l).map_err(|e| Error::SpecSemantic(format!("level {}: {e}", i + 1))))
        .collect::<Result<_>>()?;
    TowerSpec::new(d.kind, levels, d.links.clone()).map_err(|e| Error::SpecSemantic(e.to_string()))
}

/// Inline definition reproducing an exact structure.
pub fn structure_def(s: &NambuStructure) -> Result<StructureDef> {
    let t = s.exact_tensor()?;
    let tensor = t.terms().map(|(ix, c)| (ix.one_based(), c.to_string())).collect();
    let q = |v: &[f64]| v.iter().map(|&x| Q::from_f64_approx(x, 1_000_000)).collect::<Vec<_>>();
    Ok(StructureDef {
        name: Some(s.name.clone()),
        n: Some(s.n()),
        r: Some(s.r()),
        restriction: if s.is_partial() { Some(s.restriction().clone()) } else { None },
        tensor,
        domain: Some(DomainDef { lo: q(&s.domain().lo), hi: q(&s.domain().hi) }),
        ..StructureDef::default()
    })
}

impl SpecFile {
    pub fn for_structure(s: &NambuStructure) -> Result<SpecFile> {
        Ok(SpecFile { version: FORMAT_VERSION, expect_fail: Vec::new(), structure: Some(structure_def(s)?), tower: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::GalleryParams;

    const CANON: &str = "version = 1\n[structure]\nname = \"canonical-3\"\nn = 3\nr = 3\n[structure.tensor]\n\"1,2,3\" = \"1\"\n";

    #[test]
    fn parse_examples() {
        let s = SpecFile::parse_str(CANON).unwrap().structure().unwrap();
        assert_eq!((s.n(), s.r()), (3, 3));
        assert_eq!(s.exact_tensor().unwrap(), &AltTensor::basis(3, &[0, 1, 2], Variance::Vector));
        let rep = SpecFile::parse_str(&CANON.replace("1,2,3", "1,1,3")).unwrap_err();
        assert!(rep.to_string().contains("repeated index"), "{rep}");
        assert!(rep.to_string().contains("line 7"), "{rep}");
        let swapped = SpecFile::parse_str(&CANON.replace("1,2,3", "2,1,3")).unwrap().structure().unwrap();
        assert_eq!(swapped.exact_tensor().unwrap().get(&MultiIndex::from_sorted(&[0, 1, 2])), Poly::constant(Q::from(-1)));
        match SpecFile::parse_str(&CANON.replace("n = 3", "n = 3\nbogus = 1")) {
            Err(Error::SpecSyntax { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        match SpecFile::parse_str("version = 1\n[structure\n") {
            Err(Error::SpecSyntax { line, column, .. }) => assert_eq!((line, column), (2, 11)),
            other => panic!("{other:?}"),
        }
        assert!(SpecFile::parse_str(&CANON.replace("version = 1", "version = 2")).unwrap_err().to_string().contains("version"));
        assert!(SpecFile::parse_str(&CANON.replace("1,2,3", "1,2,4")).is_err());
        assert!(SpecFile::parse_str(&CANON.replace("\"1\"", "\"x4\"")).is_err());
    }

    #[test]
    fn towers_and_gallery_refs() {
        let src = r#"
version = 1
[tower]
kind = "projective"
links = [
  [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0]],
  [[1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0], [0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 1, 0]],
]
[[tower.levels]]
gallery = "canonical"
params = { n = "4", r = "3" }
[[tower.levels]]
gallery = "canonical"
params = { n = "5", r = "3" }
[[tower.levels]]
gallery = "canonical"
params = { n = "6", r = "3" }
"#;
        let spec = SpecFile::parse_str(src).unwrap();
        let t = spec.tower().unwrap();
        assert_eq!((t.len(), t.links().len()), (3, 2));
        assert_eq!(SpecFile::parse_str(&spec.emit().unwrap()).unwrap(), spec);
        assert!(spec.structure().is_err());
        let bad = src.replace("[0, 0, 0, 1, 0]],", "[0, 0, 0, 0, 0]],");
        assert!(SpecFile::parse_str(&bad).unwrap_err().to_string().contains("rank"));
    }

    #[test]
    fn gallery_round_trip() {
        for name in ["canonical", "scaled", "l1", "seqpoisson", "heisenberg"] {
            let s = gallery(name, &GalleryParams::new()).unwrap().structure;
            let spec = SpecFile::for_structure(&s).unwrap();
            let text = spec.emit().unwrap();
            let back = SpecFile::parse_str(&text).unwrap();
            assert_eq!(back, spec, "{text}");
            let s2 = back.structure().unwrap();
            assert_eq!(s2.exact_tensor().unwrap(), s.exact_tensor().unwrap(), "{name}");
            assert_eq!(s2.restriction(), s.restriction());
        }
    }
}
