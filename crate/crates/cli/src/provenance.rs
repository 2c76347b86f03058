//! Provenance records attached to every written artifact.

use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use sarlayers::sarcore::io::{sidecar_path, write_json};
use sarlayers::{Result, SarError};

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| SarError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Command line and input checksums of the running invocation.
#[derive(Debug, Clone)]
pub struct Provenance {
    command_line: Vec<String>,
    inputs: Map<String, Value>,
}

impl Provenance {
    pub fn new(command_line: Vec<String>) -> Self {
        Provenance {
            command_line,
            inputs: Map::new(),
        }
    }

    /// Records the checksum of an input payload.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.inputs.insert(path.display().to_string(), Value::String(digest));
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        json!({
            "tool": concat!("sarlayers ", env!("CARGO_PKG_VERSION")),
            "command_line": self.command_line,
            "input_sha256": self.inputs,
        })
    }

    /// Sidecar extras carrying the provenance record.
    pub fn extras(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("provenance".into(), self.to_value());
        m
    }

    /// Writes `<path>.meta` for artifacts without a format-specific sidecar.
    pub fn write_sidecar(&self, path: &Path, mut extra: Map<String, Value>) -> Result<()> {
        extra.insert("provenance".into(), self.to_value());
        extra.insert("payload_sha256".into(), Value::String(sha256_file(path)?));
        write_json(&sidecar_path(path), &extra)
    }
}
