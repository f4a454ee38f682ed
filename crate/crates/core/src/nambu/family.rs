//! Test-function families for identity checks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::poly::Poly;
use crate::scalar::Q;

use super::{rng_for, stream, NambuStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// Restricted linear forms only.
    Coords,
    /// Linear forms and their pairwise products.
    #[default]
    Quad,
    /// `Quad` plus eight seeded random quadratics.
    Full,
}

impl std::str::FromStr for FamilyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "coords" => Ok(FamilyKind::Coords),
            "quad" => Ok(FamilyKind::Quad),
            "full" => Ok(FamilyKind::Full),
            other => Err(format!("unknown family `{other}` (coords, quad, full)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TestFamily {
    pub kind: FamilyKind,
    pub members: Vec<Poly>,
}

impl TestFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Indices of the linear members.
    pub fn linear(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i].degree() <= 1).collect()
    }
}

/// Built from the rows `ℓ_i` of the restriction so every member is admissible:
/// `ℓ_i`, then `ℓ_i ℓ_j` for `i ≤ j`, then random combinations of those.
pub fn test_family(s: &NambuStructure, kind: FamilyKind, seed: u64) -> TestFamily {
    let lin = s.restriction_forms();
    let mut members = lin.clone();
    if kind != FamilyKind::Coords {
        for i in 0..lin.len() {
            for j in i..lin.len() {
                members.push(lin[i].mul(&lin[j]));
            }
        }
    }
    if kind == FamilyKind::Full {
        let mut rng = rng_for(seed, stream::FAMILY);
        let base = members.len();
        for _ in 0..8 {
            let mut p = Poly::zero();
            for m in &members[..base] {
                let c: i64 = rng.random_range(-3..=3);
                if c != 0 {
                    p = p.add(&m.scale(Q::from(c)));
                }
            }
            if p.degree() < 2 {
                p = p.add(&members[lin.len()]);
            }
            members.push(p);
        }
    }
    TestFamily { kind, members }
}
