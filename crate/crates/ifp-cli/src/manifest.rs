//! Run manifests: what was invoked, with what inputs, producing which files.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use ifp::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

/// Written next to every command's outputs. `argv` holds the fully resolved
/// invocation (subcommand plus flags), so a rerun from the manifest is just
/// `ifp <argv...>`; identical inputs reproduce every listed output
/// byte-for-byte regardless of thread count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config_path: String,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, config_path: &Path, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            argv,
            config_path: config_path.display().to_string(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            outputs: Vec::new(),
        }
    }

    /// Write `content` to `path` and record it.
    pub fn write_output(&mut self, path: &Path, content: &str) -> Result<()> {
        std::fs::write(path, content)?;
        let mut hasher = Sha256::new();
        hasher.update(content.as_bytes());
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.outputs.push(OutputEntry {
            path: path.display().to_string(),
            sha256: hex,
        });
        Ok(())
    }

    pub fn save(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join(format!("manifest_{}.json", self.command));
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}
