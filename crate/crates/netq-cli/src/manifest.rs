//! A sidecar JSON record of everything a run needs to be reproduced:
//! the subcommand, tool version, base seed, the fully resolved config
//! (file values merged with command-line overrides and defaults), and
//! the list of files the run wrote.

use netq::error::{Error, Result};
use serde::Serialize;
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub timestamp: String,
    pub base_seed: u64,
    pub epsilon: f64,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, base_seed: u64, epsilon: f64, config: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            base_seed,
            epsilon,
            config,
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes the manifest itself (listed among its own outputs).
    pub fn write(&mut self, path: &Path) -> Result<()> {
        self.record(path);
        let text = serde_json::to_string_pretty(self).map_err(Error::Json)?;
        std::fs::write(path, text).map_err(Error::Io)?;
        Ok(())
    }
}
