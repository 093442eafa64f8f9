//! Structured pass/fail reports with witnesses.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Follows from the other conditions once they pass; counts as a pass.
    Implied,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        !matches!(self, Verdict::Fail)
    }
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub quantity: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub face: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Witness {
    pub fn new(point: &[f64], quantity: &str, value: f64) -> Self {
        Self { point: point.to_vec(), quantity: quantity.to_string(), value, face: None, detail: None }
    }
    pub fn on_face(mut self, face: &[usize]) -> Self {
        self.face = Some(face.to_vec());
        self
    }
    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub values: BTreeMap<String, f64>,
    pub witnesses: Vec<Witness>,
}

impl Condition {
    pub fn new(name: &str, pass: bool) -> Self {
        Self {
            name: name.to_string(),
            verdict: Verdict::from_bool(pass),
            reason: None,
            tolerances: BTreeMap::new(),
            values: BTreeMap::new(),
            witnesses: Vec::new(),
        }
    }
    pub fn implied(name: &str, reason: &str) -> Self {
        let mut c = Self::new(name, true);
        c.verdict = Verdict::Implied;
        c.reason = Some(reason.to_string());
        c
    }
    pub fn with_tolerance(mut self, k: &str, v: f64) -> Self {
        self.tolerances.insert(k.to_string(), v);
        self
    }
    pub fn with_value(mut self, k: &str, v: f64) -> Self {
        self.values.insert(k.to_string(), v);
        self
    }
    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witnesses.push(w);
        self
    }
    pub fn with_reason(mut self, r: impl Into<String>) -> Self {
        self.reason = Some(r.into());
        self
    }
    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDoc {
    pub kind: String,
    pub verdict: Verdict,
    pub conditions: Vec<Condition>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    pub info: BTreeMap<String, Value>,
}

impl ReportDoc {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            verdict: Verdict::Pass,
            conditions: Vec::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
            info: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, c: Condition) {
        self.conditions.push(c);
        self.verdict = Verdict::from_bool(self.conditions.iter().all(|c| c.passed()));
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
    pub fn warn(&mut self, s: impl Into<String>) {
        self.warnings.push(s.into());
    }
    pub fn set_info(&mut self, k: &str, v: impl Into<Value>) {
        self.info.insert(k.to_string(), v.into());
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Append another report's conditions, prefixing their names.
    pub fn merge(&mut self, prefix: &str, other: ReportDoc) {
        for mut c in other.conditions {
            c.name = format!("{prefix}{}", c.name);
            self.push(c);
        }
        self.notes.extend(other.notes);
        self.warnings.extend(other.warnings);
        for (k, v) in other.info {
            self.info.insert(format!("{prefix}{k}"), v);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
