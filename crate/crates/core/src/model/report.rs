use std::fmt::Write as _;

use serde::Serialize;

use crate::jet::FieldResidual;

/// Outcome of one identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub group: String,
    pub residual: f64,
    /// Per-degree defect; empty for constant (matrix) identities.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_degree: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_degree: Option<usize>,
    pub pass: bool,
}

/// Residual table for a batch of identities checked at one tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub tol: f64,
    pub checks: Vec<IdentityCheck>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(tol: f64) -> Self {
        Self { tol, checks: Vec::new(), notes: Vec::new(), pass: true }
    }

    pub fn push_field(&mut self, name: &str, group: &str, r: &FieldResidual) {
        let residual = r.max();
        self.push(IdentityCheck {
            name: name.to_string(),
            group: group.to_string(),
            residual,
            per_degree: r.per_degree.clone(),
            certified_degree: Some(r.certified_degree),
            pass: residual <= self.tol,
        });
    }

    pub fn push_scalar(&mut self, name: &str, group: &str, residual: f64) {
        self.push(IdentityCheck {
            name: name.to_string(),
            group: group.to_string(),
            residual,
            per_degree: Vec::new(),
            certified_degree: None,
            pass: residual <= self.tol,
        });
    }

    /// Entry whose verdict is decided by the caller, e.g. a margin that must
    /// stay positive.
    pub fn push_verdict(&mut self, name: &str, group: &str, value: f64, pass: bool) {
        self.push(IdentityCheck {
            name: name.to_string(),
            group: group.to_string(),
            residual: value,
            per_degree: Vec::new(),
            certified_degree: None,
            pass,
        });
    }

    fn push(&mut self, c: IdentityCheck) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn merge(&mut self, other: CheckReport) {
        for c in other.checks {
            self.push(c);
        }
        self.notes.extend(other.notes);
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let cert = c.certified_degree.map(|d| format!("  (through degree {d})")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{:<5} {:<width$}  {:.16e}{}",
                if c.pass { "ok" } else { "FAIL" },
                c.name,
                c.residual,
                cert
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "verdict: {} (tol {:e})", if self.pass { "pass" } else { "fail" }, self.tol);
        s
    }
}
