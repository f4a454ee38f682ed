//! Re-verify a single witness in isolation.

use crate::fields::lie_derivative_multivector_poly;
use crate::multilinear::AltTensor;
use crate::nambu::{structural_defect_at, NambuStructure};
use crate::poly::Poly;
use crate::report::{CheckReport, Witness};
use crate::scalar::Q;
use crate::{Error, Result};

pub const ANCHOR_REPLAY: &str = "witness reproduces the recorded failure";

/// Checks whose witnesses can be replayed.
pub const REPLAYABLE: [&str; 5] = ["filippov_direct", "leibniz", "lie_derivative", "filippov_structural", "census"];

fn polys(slots: &[String]) -> Result<Vec<Poly>> {
    slots.iter().map(|s| Poly::parse(s)).collect()
}

fn point(w: &Witness) -> Result<Vec<f64>> {
    let p = w.point.as_ref().ok_or_else(|| Error::Config(format!("{} witness carries no point", w.check)))?;
    p.iter().map(|v| v.parse::<f64>().map_err(|_| Error::Config(format!("bad witness coordinate `{v}`")))).collect()
}

fn arity(w: &Witness, f: usize, g: usize) -> Result<()> {
    if w.f_slots.len() != f || w.g_slots.len() != g {
        return Err(Error::Config(format!(
            "{} witness needs {f} f-slots and {g} g-slots, got {} and {}",
            w.check,
            w.f_slots.len(),
            w.g_slots.len()
        )));
    }
    Ok(())
}

/// `{f, {g₁..g_r}} − Σ_i {g₁..{f, g_i}..g_r}` as a polynomial.
pub fn filippov_residual(s: &NambuStructure, f: &[Poly], g: &[Poly]) -> Result<Poly> {
    let br = |args: &[&Poly]| s.bracket_field(args);
    let with = |p: &Poly| -> Result<Poly> {
        let mut v: Vec<&Poly> = f.iter().collect();
        v.push(p);
        br(&v)
    };
    let gref: Vec<&Poly> = g.iter().collect();
    let mut res = with(&br(&gref)?)?;
    for i in 0..g.len() {
        let h = with(&g[i])?;
        let mut args = gref.clone();
        args[i] = &h;
        res = res.sub(&br(&args)?);
    }
    Ok(res)
}

/// Recompute the witness value; the report passes when it matches the
/// recorded value, i.e. the failure is reproduced.
pub fn replay_witness(s: &NambuStructure, w: &Witness, seed: u64) -> Result<CheckReport> {
    let mut rep = CheckReport::new(&format!("replay:{}", w.check), ANCHOR_REPLAY, &s.name, seed);
    rep.evaluated = 1;
    let r = s.r();
    let value = match w.check.as_str() {
        "filippov_direct" => {
            if w.point.is_some() {
                return Err(Error::Unsupported("replaying sampled filippov_direct witnesses".into()));
            }
            arity(w, r - 1, r)?;
            filippov_residual(s, &polys(&w.f_slots)?, &polys(&w.g_slots)?)?.to_string()
        }
        "leibniz" => {
            arity(w, r - 1, 2)?;
            let f = polys(&w.f_slots)?;
            let gh = polys(&w.g_slots)?;
            let with = |p: &Poly| -> Result<Poly> {
                let mut v: Vec<&Poly> = f.iter().collect();
                v.push(p);
                s.bracket_field(&v)
            };
            let (g, h) = (&gh[0], &gh[1]);
            with(&g.mul(h))?.sub(&g.mul(&with(h)?)).sub(&h.mul(&with(g)?)).to_string()
        }
        "lie_derivative" => {
            arity(w, r - 1, r)?;
            let f = polys(&w.f_slots)?;
            let g = polys(&w.g_slots)?;
            let x = s.hamiltonian_poly(&f.iter().collect::<Vec<_>>())?;
            lie_derivative_multivector_poly(&x, s.exact_tensor()?, &g.iter().collect::<Vec<_>>()).to_string()
        }
        "filippov_structural" => {
            let x = point(w)?;
            let omegas: Vec<AltTensor<f64>> = s.basis_multicovectors().into_iter().map(|(_, m)| m.map_into(Q::to_f64)).collect();
            match structural_defect_at(s, &omegas, &x).1 {
                Some((detail, value)) => {
                    rep.note(detail);
                    value
                }
                None => "no defect".into(),
            }
        }
        "census" => format!("rank {}", s.classify_point(&point(w)?).rank),
        other => {
            return Err(Error::Config(format!("witnesses of `{other}` cannot be replayed (supported: {})", REPLAYABLE.join(", "))));
        }
    };
    if value != w.value {
        rep.fail(Witness { value: value.clone(), detail: format!("recorded value {}", w.value), ..w.clone() });
    }
    rep.note(format!("recomputed {value}"));
    Ok(rep)
}

/// Witnesses from a JSON file holding one witness, one report, or report
/// lines as printed by the CLI.
pub fn load_witnesses(text: &str) -> Result<Vec<Witness>> {
    if let Ok(w) = serde_json::from_str::<Witness>(text) {
        return Ok(vec![w]);
    }
    if let Ok(r) = serde_json::from_str::<CheckReport>(text) {
        return Ok(r.witnesses);
    }
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Config(format!("witness file: {e}")))?;
        if let Ok(r) = serde_json::from_value::<CheckReport>(v) {
            out.extend(r.witnesses);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("witness file holds no witnesses".into()));
    }
    Ok(out)
}
