use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// SHA-256 over the command line and every file the command read.
#[derive(Debug, Default)]
pub struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    pub fn add(&mut self, label: &str, bytes: &[u8]) {
        for part in [label.as_bytes(), bytes] {
            self.hasher.update((part.len() as u64).to_le_bytes());
            self.hasher.update(part);
        }
    }

    pub fn finish(self) -> String {
        self.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub verb: String,
    pub version: &'static str,
    pub inputs_digest: String,
    pub results: Value,
    pub error_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Result of a command before it is wrapped into a report.
#[derive(Debug)]
pub enum Outcome {
    Json {
        results: Value,
        error_estimate: Option<f64>,
        passed: Option<bool>,
    },
    /// Tabular output written as-is; `summary` becomes a report when the
    /// table goes to a file.
    Csv { table: String, summary: Value, error_estimate: Option<f64> },
}

/// Finite reals as JSON numbers, infinities as strings.
pub fn real(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v.is_nan() {
        Value::Null
    } else if v > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}
