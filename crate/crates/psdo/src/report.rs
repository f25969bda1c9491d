//! Structured run reports and labeled numeric tables.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::container::write_atomic;
use crate::CliError;

/// A numeric table with a label and a unit per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub units: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(cols: &[(&str, &str)]) -> Self {
        Table {
            columns: cols.iter().map(|c| c.0.to_string()).collect(),
            units: cols.iter().map(|c| c.1.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV with a `label [unit]` header row.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = self
            .columns
            .iter()
            .zip(&self.units)
            .map(|(c, u)| if u.is_empty() { c.clone() } else { format!("{c} [{u}]") })
            .collect();
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| match v {
                Value::String(s) => s.clone(),
                Value::Null => String::new(),
                other => other.to_string(),
            }))
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub timestamp: u64,
    pub exit_code: i32,
    pub verdict: String,
    pub sections: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &str, config_sha256: String, seed: u64) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256,
            seed,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            exit_code: 0,
            verdict: String::new(),
            sections: BTreeMap::new(),
        }
    }

    pub fn section(&mut self, name: &str, v: impl Serialize) {
        self.sections.insert(name.to_string(), serde_json::to_value(v).expect("section serializes"));
    }

    pub fn finish(&mut self, exit_code: i32, verdict: impl Into<String>) {
        self.exit_code = exit_code;
        self.verdict = verdict.into();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Serialization with the timestamp zeroed, for byte comparisons.
    pub fn canonical(&self) -> String {
        let mut r = self.clone();
        r.timestamp = 0;
        r.to_json()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_atomic(path, self.to_json().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_has_units_in_header() {
        let mut t = Table::new(&[("N", "nodes"), ("index", "")]);
        t.push(vec![json!(64), json!(-1)]);
        assert_eq!(t.to_csv().unwrap(), "N [nodes],index\n64,-1\n");
    }

    #[test]
    fn canonical_form_drops_the_timestamp_only() {
        let mut a = Report::new("check", "00".into(), 3);
        a.section("b", json!({"x": 1.5}));
        a.section("a", json!([1, 2]));
        let mut b = a.clone();
        b.timestamp += 100;
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.canonical(), b.canonical());
        let keys: Vec<_> = a.sections.keys().cloned().collect();
        assert_eq!(keys, ["a", "b"]);
    }
}
