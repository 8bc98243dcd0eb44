//! JSON / table reports: one record per check, with witnesses and metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub verdict: bool,
    pub witnesses: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, f64>,
}

impl CheckRecord {
    pub fn new(check: impl Into<String>, verdict: bool) -> Self {
        Self {
            check: check.into(),
            verdict,
            witnesses: BTreeMap::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn witness(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.witnesses.insert(key.into(), v);
        self
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.into(), value);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub seed: u64,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new(name: impl Into<String>, seed: u64) -> Self {
        Self {
            name: name.into(),
            seed,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.verdict)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One line per check: verdict, name, then `key=value` metrics.
    pub fn to_table(&self) -> String {
        let width = self.records.iter().map(|r| r.check.len()).max().unwrap_or(0);
        let mut out = format!("{} (seed {})\n", self.name, self.seed);
        for r in &self.records {
            let _ = write!(out, "{}  {:<width$}", if r.verdict { "PASS" } else { "FAIL" }, r.check);
            for (k, v) in &r.metrics {
                let _ = write!(out, "  {k}={v}");
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_table() {
        let mut r = Report::new("demo", 3);
        r.push(CheckRecord::new("a", true).metric("z", 1.5).metric("b", 2.0));
        r.push(CheckRecord::new("bb", false).witness("pairs", vec![(0, 1)]));
        assert!(!r.passed());
        let j = r.to_json().unwrap();
        let back: Report = serde_json::from_str(&j).unwrap();
        assert_eq!(back, r);
        // metrics are key-sorted
        assert!(j.find("\"b\"").unwrap() < j.find("\"z\"").unwrap());
        let t = r.to_table();
        assert!(t.contains("PASS  a   b=2  z=1.5"));
        assert!(t.contains("FAIL  bb"));
    }
}
