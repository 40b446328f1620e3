use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::config::ExperimentConfig;

/// One certified inequality or identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The claim under test, stated as the inequality it asserts.
    pub claim: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig, columns: &[&str]) -> Self {
        Self {
            config: config.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn row(&mut self, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    /// Records a check of the form `value <= threshold` (or its negation
    /// encoded by the caller in `passed`).
    pub fn check(&mut self, name: &str, claim: &str, passed: bool, value: f64, threshold: f64) {
        self.passed &= passed;
        self.checks.push(Check { name: name.into(), claim: claim.into(), passed, value, threshold });
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable check listing.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "[{}] {}: value {} vs threshold {} ({})\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                fmt_f64(c.value),
                fmt_f64(c.threshold),
                c.claim
            ));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}
