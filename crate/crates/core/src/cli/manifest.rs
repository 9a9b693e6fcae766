//! Run manifests: what was asked, what was read, what was written.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::config::Settings;
use crate::error::{Error, Result};
use crate::sim::shotfile::write_atomic;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: Settings,
    pub inputs: Vec<FileDigest>,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileDigest>,
    /// Wall-clock milliseconds per phase. The only field that changes between
    /// identical re-runs.
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<RunManifest> {
        let path = dir.join(MANIFEST_NAME);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn output(&self, name: &str) -> Result<&FileDigest> {
        self.outputs
            .iter()
            .find(|f| f.path == name)
            .ok_or_else(|| Error::data(format!("manifest lists no output {name:?}")))
    }

    /// Reads output `name` from `dir` and checks it against the recorded digest.
    pub fn read_verified(&self, dir: &Path, name: &str) -> Result<(Vec<u8>, FileDigest)> {
        let entry = self.output(name)?;
        let path = dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let digest = sha256_hex(&bytes);
        if digest != entry.sha256 {
            return Err(Error::data(format!(
                "{} does not match its manifest digest ({} vs {})",
                path.display(),
                digest,
                entry.sha256
            )));
        }
        Ok((bytes, FileDigest { path: path.display().to_string(), sha256: digest, bytes: entry.bytes }))
    }
}

/// Collects outputs and timings while a command runs.
pub struct RunWriter {
    dir: PathBuf,
    settings: Settings,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    timings: BTreeMap<String, f64>,
    phase: Instant,
}

impl RunWriter {
    pub fn new(dir: &Path, settings: &Settings) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            settings: settings.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: BTreeMap::new(),
            phase: Instant::now(),
        })
    }

    pub fn input(&mut self, digest: FileDigest) {
        self.inputs.push(digest);
    }

    pub fn input_file(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Records the time since the previous mark under `name`.
    pub fn mark(&mut self, name: &str) {
        let now = Instant::now();
        self.timings.insert(name.to_string(), (now - self.phase).as_secs_f64() * 1e3);
        self.phase = now;
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.outputs.push(FileDigest { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn finish(self) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.settings,
            inputs: self.inputs,
            outputs: self.outputs,
            timings_ms: self.timings,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        write_atomic(&self.dir.join(MANIFEST_NAME), text.as_bytes())?;
        Ok(manifest)
    }
}
