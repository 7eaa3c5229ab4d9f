use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::numerics::Enclosure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanStatus {
    AllPassed,
    Counterexample,
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingVerdict {
    Pass,
    Violation,
    Unresolved,
    /// Recorded observation that does not bear on the status.
    Note,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub indices: Vec<String>,
    pub enclosures: BTreeMap<String, Enclosure>,
    pub verdict: FindingVerdict,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Finding {
    pub fn new(indices: Vec<String>, verdict: FindingVerdict) -> Self {
        Self {
            indices,
            enclosures: BTreeMap::new(),
            verdict,
            detail: String::new(),
        }
    }

    pub fn with(mut self, name: &str, e: &Enclosure) -> Self {
        self.enclosures.insert(name.to_string(), e.clone());
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

/// Machine-readable outcome of one verification scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub scan_id: String,
    pub parameters: BTreeMap<String, Value>,
    pub findings: Vec<Finding>,
    pub status: ScanStatus,
}

impl ScanReport {
    pub(crate) fn new(scan_id: &str) -> Self {
        Self {
            scan_id: scan_id.to_string(),
            parameters: BTreeMap::new(),
            findings: Vec::new(),
            status: ScanStatus::AllPassed,
        }
    }

    pub(crate) fn param(mut self, name: &str, v: impl Into<Value>) -> Self {
        self.parameters.insert(name.to_string(), v.into());
        self
    }

    pub(crate) fn push(&mut self, f: Finding) {
        self.findings.push(f);
    }

    /// Sets the status from the findings.
    pub(crate) fn finish(mut self) -> Self {
        self.status = if self.findings.iter().any(|f| f.verdict == FindingVerdict::Violation) {
            ScanStatus::Counterexample
        } else if self.findings.iter().any(|f| f.verdict == FindingVerdict::Unresolved) {
            ScanStatus::Unresolved
        } else {
            ScanStatus::AllPassed
        };
        self
    }

    pub fn count(&self, v: FindingVerdict) -> usize {
        self.findings.iter().filter(|f| f.verdict == v).count()
    }

    /// Merges several reports into one, keeping findings in order.
    pub fn combine(scan_id: &str, parts: Vec<ScanReport>) -> ScanReport {
        let mut out = ScanReport::new(scan_id);
        for p in parts {
            out.parameters
                .insert(p.scan_id.clone(), Value::Object(p.parameters.into_iter().collect()));
            out.findings.extend(p.findings);
        }
        out.finish()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Plain-text rendering of the same data.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scan      {}", self.scan_id);
        let _ = writeln!(s, "status    {:?}", self.status);
        for (k, v) in &self.parameters {
            let _ = writeln!(s, "param     {k} = {v}");
        }
        let _ = writeln!(s, "{:<10} {:<40} detail", "verdict", "indices");
        for f in &self.findings {
            let _ = writeln!(
                s,
                "{:<10} {:<40} {}",
                format!("{:?}", f.verdict).to_lowercase(),
                f.indices.join(" "),
                f.detail
            );
            for (name, e) in &f.enclosures {
                let (lo, hi) = e.to_decimal_bounds(25);
                let _ = writeln!(s, "{:<10} {name} ∈ [{lo}, {hi}]", "");
            }
        }
        s
    }
}
