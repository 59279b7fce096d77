//! JSON channel specification files.
//!
//! ```json
//! {"n": 3, "pi": [[0.25, 0.125, 0.0833], ...], "label": "optional"}
//! ```
//!
//! `pi[j][k]` is the weight of `W_jk = U^j V^k`: row `j` is the power of the
//! clock `U`, column `k` the power of the shift `V`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use weylcap_core::WeylChannelSpec;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpecFile {
    pub n: usize,
    pub pi: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl ChannelSpecFile {
    pub fn from_spec(spec: &WeylChannelSpec, label: Option<String>) -> Self {
        Self {
            n: spec.n(),
            pi: spec.rows(),
            label,
        }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec files always serialize")
    }

    pub fn validate(&self) -> Result<WeylChannelSpec, CliError> {
        WeylChannelSpec::new(self.n, &self.pi).map_err(|e| CliError::Validation(e.to_string()))
    }
}

/// Raw bytes plus the parsed and validated spec.
pub struct LoadedSpec {
    pub bytes: Vec<u8>,
    pub file: ChannelSpecFile,
    pub spec: WeylChannelSpec,
}

pub fn load(path: &Path) -> Result<LoadedSpec, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let file = ChannelSpecFile::parse(&text, &path.display().to_string())?;
    let spec = file.validate()?;
    Ok(LoadedSpec { bytes, file, spec })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_validate() {
        let f = ChannelSpecFile::parse(r#"{"n": 2, "pi": [[0.4, 0.2], [0.3, 0.1]], "label": "pauli"}"#, "inline").unwrap();
        let spec = f.validate().unwrap();
        assert_eq!(spec.pi(1, 0), 0.3);
        assert_eq!(f.label.as_deref(), Some("pauli"));
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let err = ChannelSpecFile::parse("{n: 2", "inline").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invalid_table_is_a_validation_error() {
        let f = ChannelSpecFile::parse(r#"{"n": 2, "pi": [[0.5, 0.5], [0.5, 0.5]]}"#, "inline").unwrap();
        assert_eq!(f.validate().unwrap_err().exit_code(), 3);
        let f = ChannelSpecFile::parse(r#"{"n": 2, "pi": [[1.0, 0.0]]}"#, "inline").unwrap();
        assert_eq!(f.validate().unwrap_err().exit_code(), 3);
    }

    #[test]
    fn round_trip_keeps_full_precision() {
        let spec = weylcap_core::weyl::qutrit_example();
        let json = ChannelSpecFile::from_spec(&spec, None).to_json();
        let back = ChannelSpecFile::parse(&json, "inline").unwrap().validate().unwrap();
        assert_eq!(back, spec);
    }
}
