use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

impl FileHash {
    pub fn of(path: &Path, shown_as: &str) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
        Ok(FileHash {
            path: shown_as.to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Record of one run: the effective configuration, every input and output
/// file with its SHA-256, and a command-specific summary.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub single_thread: bool,
    /// The configuration after overrides, re-serialized as TOML.
    pub config: String,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub summary: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &'static str, single_thread: bool, config: String) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            single_thread,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            summary: serde_json::Value::Null,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileHash::of(path, &path.display().to_string())?);
        Ok(())
    }

    /// Hashes a file inside `dir`, recorded by its name relative to `dir`.
    pub fn add_output(&mut self, dir: &Path, name: &str) -> Result<()> {
        self.outputs.push(FileHash::of(&dir.join(name), name)?);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
