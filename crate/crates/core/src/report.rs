//! Check reports: deterministic, serializable verdict records.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Unsupported,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Unsupported => "unsupported",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Residual {
    /// Largest residual magnitude seen (max |coefficient| for exact residuals).
    pub max: f64,
    /// True when residuals were decided symbolically.
    pub exact: bool,
    /// Where the maximum occurred.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub at: Option<String>,
}

/// A replayable counterexample.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Witness {
    pub check: String,
    #[serde(default)]
    pub f_slots: Vec<String>,
    #[serde(default)]
    pub g_slots: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub point: Option<Vec<String>>,
    pub value: String,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    /// Name of the identity or theorem the check exercises.
    pub anchor: String,
    pub subject: String,
    pub verdict: Verdict,
    pub residual: Residual,
    /// Number of slot assignments or sample points examined.
    pub evaluated: usize,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing_ms: Option<f64>,
}

impl CheckReport {
    pub fn new(check: &str, anchor: &str, subject: &str, seed: u64) -> CheckReport {
        CheckReport {
            check: check.to_string(),
            anchor: anchor.to_string(),
            subject: subject.to_string(),
            verdict: Verdict::Pass,
            residual: Residual { max: 0.0, exact: true, at: None },
            evaluated: 0,
            witnesses: Vec::new(),
            notes: Vec::new(),
            seed,
            timing_ms: None,
        }
    }

    pub fn unsupported(check: &str, anchor: &str, subject: &str, seed: u64, why: &str) -> CheckReport {
        let mut r = CheckReport::new(check, anchor, subject, seed);
        r.verdict = Verdict::Unsupported;
        r.notes.push(why.to_string());
        r
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Track the largest residual.
    pub fn observe(&mut self, magnitude: f64, at: impl FnOnce() -> String) {
        if magnitude > self.residual.max {
            self.residual.max = magnitude;
            self.residual.at = Some(at());
        }
    }

    pub fn fail(&mut self, w: Witness) {
        self.verdict = Verdict::Fail;
        self.witnesses.push(w);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{:<28} {:<12} {:<11} max residual {:.3e} over {} cases",
            self.check,
            self.verdict.as_str(),
            self.subject,
            self.residual.max,
            self.evaluated
        )
    }
}

pub fn fmt_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", parts.join(", "))
}
