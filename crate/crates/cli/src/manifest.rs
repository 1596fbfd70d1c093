//! Run manifests: which tool version ran what, over which inputs, producing
//! which outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command_line: Vec<String>,
    pub seed: Option<u64>,
    /// SHA-256 of each input file.
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<String>,
    pub elapsed_ms: u128,
}

pub fn sha256_file(path: &Path) -> Result<String, String> {
    let bytes =
        std::fs::read(path).map_err(|e| format!("cannot hash {}: {e}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(seed: Option<u64>) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            command_line: std::env::args().collect(),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            elapsed_ms: 0,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), String> {
        self.inputs.push((path.display().to_string(), sha256_file(path)?));
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes `manifest.json` into the output directory.
    pub fn write(mut self, out_dir: &Path, started: std::time::Instant) -> Result<PathBuf, String> {
        self.elapsed_ms = started.elapsed().as_millis();
        let path = out_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self)
            .map_err(|e| format!("manifest serialization failed: {e}"))?;
        std::fs::write(&path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        Ok(path)
    }
}
