//! Run manifests and report files.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Sidecar describing how an output file was produced.
#[derive(Debug, Default, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub version: String,
    pub timestamp: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub decisions: Map<String, Value>,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            seed: Some(seed),
            ..Self::default()
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn decision(mut self, key: &str, value: Value) -> Self {
        self.decisions.insert(key.to_string(), value);
        self
    }

    pub fn write(mut self, path: &Path) -> Result<()> {
        self.version = env!("CARGO_PKG_VERSION").to_string();
        self.timestamp = chrono::Utc::now().to_rfc3339();
        write_json(path, &self)
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
