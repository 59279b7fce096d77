use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use weylcap_core::LogBase;

use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One JSON object per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub command: String,
    pub inputs_digest: String,
    pub base: LogBase,
    pub seed: u64,
    pub tool_version: String,
    pub results: Value,
}

impl ReportFile {
    pub fn new(command: &str, digest: String, base: LogBase, seed: u64, results: Value) -> Self {
        Self {
            command: command.to_string(),
            inputs_digest: digest,
            base,
            seed,
            tool_version: TOOL_VERSION.to_string(),
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Paths of numeric fields that are not finite (serialized as `null`).
    pub fn non_finite_fields(&self) -> Vec<String> {
        fn walk(v: &Value, path: String, out: &mut Vec<String>) {
            match v {
                Value::Null => out.push(path),
                Value::Array(items) => {
                    for (i, item) in items.iter().enumerate() {
                        walk(item, format!("{path}[{i}]"), out);
                    }
                }
                Value::Object(map) => {
                    for (k, item) in map {
                        walk(item, format!("{path}.{k}"), out);
                    }
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        walk(&self.results, "results".into(), &mut out);
        out
    }

    pub fn write(&self, out: Option<&Path>) -> Result<(), CliError> {
        let mut text = self.to_json();
        text.push('\n');
        match out {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

/// SHA-256 over the command name, the input bytes and the canonical flags.
pub fn inputs_digest(command: &str, input: &[u8], flags: &str) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(input);
    h.update([0]);
    h.update(flags.as_bytes());
    hex::encode(h.finalize())
}

/// Appends one additivity row, writing the header when the file is new or empty.
pub fn append_csv_row(path: &Path, row: &AdditivityCsvRow) -> Result<(), CliError> {
    let needs_header = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(needs_header).from_writer(file);
    w.serialize(row).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdditivityCsvRow {
    pub label: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub copies: usize,
    pub scaled_single: f64,
    pub numeric_min: f64,
    pub block_bound: f64,
    pub gap_numeric: f64,
    pub gap_bound: f64,
    pub seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_every_part() {
        let a = inputs_digest("capacity", b"{}", "base=2");
        assert_eq!(a.len(), 64);
        assert_eq!(a, inputs_digest("capacity", b"{}", "base=2"));
        assert_ne!(a, inputs_digest("describe", b"{}", "base=2"));
        assert_ne!(a, inputs_digest("capacity", b"{ }", "base=2"));
        assert_ne!(a, inputs_digest("capacity", b"{}", "base=nat"));
    }

    #[test]
    fn flags_non_finite_numbers() {
        let r = ReportFile::new(
            "x",
            String::new(),
            LogBase::Bits,
            0,
            serde_json::json!({"a": f64::NAN, "b": [1.0, f64::INFINITY], "c": 0.5}),
        );
        assert_eq!(r.non_finite_fields(), vec!["results.a".to_string(), "results.b[1]".to_string()]);
    }

    #[test]
    fn csv_header_written_once() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let row = AdditivityCsvRow {
            label: "q".into(),
            n: 3,
            copies: 2,
            scaled_single: 2.9,
            numeric_min: 2.9,
            block_bound: 2.8,
            gap_numeric: 0.0,
            gap_bound: 0.1,
            seed: 1,
        };
        append_csv_row(&path, &row).unwrap();
        append_csv_row(&path, &row).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "label,n,N,scaled_single,numeric_min,block_bound,gap_numeric,gap_bound,seed"
        );
    }
}
