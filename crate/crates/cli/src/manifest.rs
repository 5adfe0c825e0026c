//! Per-stage run records written to `<out>/manifests/<stage>.json`.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use proofforge_core::digest::sha256_hex;
use proofforge_core::metrics::write_atomic;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub stage: String,
    pub config_digest: String,
    pub started_at: String,
    pub finished_at: String,
    /// Path → SHA-256 of the file contents.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// Collects the files a stage reads and writes while it runs.
#[derive(Debug)]
pub struct StageRun {
    stage: String,
    config_digest: String,
    started: DateTime<Utc>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl StageRun {
    pub fn start(stage: &str, config_digest: &str) -> Self {
        StageRun {
            stage: stage.to_string(),
            config_digest: config_digest.to_string(),
            started: Utc::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn read(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn wrote(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn finish(self, out_dir: &Path) -> io::Result<RunManifest> {
        let digests = |paths: &[PathBuf]| -> io::Result<BTreeMap<String, String>> {
            paths.iter().map(|p| Ok((p.display().to_string(), file_digest(p)?))).collect()
        };
        let manifest = RunManifest {
            run_id: Uuid::new_v4().to_string(),
            stage: self.stage.clone(),
            config_digest: self.config_digest.clone(),
            started_at: self.started.to_rfc3339_opts(SecondsFormat::Millis, true),
            finished_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            inputs: digests(&self.inputs)?,
            outputs: digests(&self.outputs)?,
        };
        let dir = out_dir.join("manifests");
        fs::create_dir_all(&dir)?;
        let mut json = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        json.push('\n');
        write_atomic(&dir.join(format!("{}.json", self.stage)), json.as_bytes())?;
        Ok(manifest)
    }
}

/// Digest of a file, or of the sorted listing of a directory's files.
fn file_digest(path: &Path) -> io::Result<String> {
    if path.is_dir() {
        let mut entries: Vec<(String, String)> = Vec::new();
        for e in fs::read_dir(path)? {
            let p = e?.path();
            if p.is_file() {
                let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
                entries.push((name, sha256_hex(fs::read(&p)?)));
            }
        }
        entries.sort();
        let listing: String = entries.iter().map(|(n, d)| format!("{d}  {n}\n")).collect();
        return Ok(sha256_hex(listing));
    }
    Ok(sha256_hex(fs::read(path)?))
}
