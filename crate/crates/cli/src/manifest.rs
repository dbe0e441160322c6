use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::{SCHEMA_VERSION, VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Provenance of one run. `id` hashes everything except the timestamp, so
/// two runs on identical inputs share an id.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<InputHash>,
    pub resolved: BTreeMap<String, Value>,
    pub id: String,
    /// Seconds since the epoch; `SOURCE_DATE_EPOCH` wins over the clock.
    pub timestamp: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Default)]
pub struct ManifestBuilder {
    command: String,
    inputs: Vec<InputHash>,
    resolved: BTreeMap<String, Value>,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            ..Self::default()
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) -> &mut Self {
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
        self
    }

    pub fn resolved(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("manifest values serialize");
        self.resolved.insert(key.to_owned(), v);
        self
    }

    pub fn build(&self) -> RunManifest {
        let body = serde_json::json!({
            "version": VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "resolved": self.resolved,
        });
        RunManifest {
            tool: "trimhelix",
            version: VERSION,
            schema_version: SCHEMA_VERSION,
            command: self.command.clone(),
            inputs: self.inputs.clone(),
            resolved: self.resolved.clone(),
            id: sha256_hex(body.to_string().as_bytes()),
            timestamp: timestamp(),
        }
    }
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}
