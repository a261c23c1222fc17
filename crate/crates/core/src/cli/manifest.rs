//! Run manifest: resolved configuration, seed, timings and output hashes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub step: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub master_seed: u64,
    /// Resolved configuration in TOML form.
    pub config: String,
    pub timings: Vec<Timing>,
    pub outputs: Vec<OutputEntry>,
}

/// Collects outputs written into one directory during an invocation.
#[derive(Debug)]
pub struct Recorder {
    pub dir: PathBuf,
    manifest: RunManifest,
    clock: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Recorder {
    pub fn new(dir: &Path, command: Vec<String>, master_seed: u64, config: String) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command,
                master_seed,
                config,
                timings: Vec::new(),
                outputs: Vec::new(),
            },
            clock: Instant::now(),
        })
    }

    /// Writes `bytes` to `name` inside the output directory and records its hash.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.manifest.outputs.retain(|o| o.path != name);
        self.manifest.outputs.push(OutputEntry {
            path: name.into(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    /// Renders CSV with `f` into a buffer and writes it.
    pub fn write_csv(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        self.write(name, &buf)
    }

    /// Records the time elapsed since the previous mark.
    pub fn mark(&mut self, step: &str) {
        let now = Instant::now();
        self.manifest.timings.push(Timing { step: step.into(), seconds: (now - self.clock).as_secs_f64() });
        self.clock = now;
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    /// Writes `manifest.json` and `config.toml` next to the outputs.
    pub fn finish(mut self) -> Result<RunManifest, CliError> {
        let config = self.manifest.config.clone();
        self.write("config.toml", config.as_bytes())?;
        let json = serde_json::to_vec_pretty(&self.manifest).expect("manifest serializes");
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, json).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(self.manifest)
    }
}
