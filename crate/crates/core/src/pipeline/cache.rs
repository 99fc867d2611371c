//! Content-addressed stage artifacts and run manifests.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;

/// Hex SHA-256 over every regular file in `dir`, visited in name order.
/// File names take part in the digest.
pub fn digest_dir(dir: &Path) -> Result<String, PipelineError> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| PipelineError::fs(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    names.sort();
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    for p in names {
        h.update(p.file_name().unwrap_or_default().as_encoded_bytes());
        h.update([0]);
        let mut f = fs::File::open(&p).map_err(|e| PipelineError::fs(&p, e))?;
        loop {
            let n = f.read(&mut buf).map_err(|e| PipelineError::fs(&p, e))?;
            if n == 0 {
                break;
            }
            h.update(&buf[..n]);
        }
    }
    Ok(hex::encode(h.finalize()))
}

pub fn digest_file(path: &Path) -> Result<String, PipelineError> {
    let bytes = fs::read(path).map_err(|e| PipelineError::fs(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hex SHA-256 of the given parts separated by NUL bytes.
pub fn combine(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0]);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEvent {
    pub stage: String,
    pub key: String,
    pub hit: bool,
}

/// Directory of stage outputs keyed by content hash.
#[derive(Debug, Clone)]
pub struct StageCache {
    root: PathBuf,
    events: Vec<CacheEvent>,
}

impl StageCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            events: Vec::new(),
        }
    }

    /// Path of the artifact; parent directories are created.
    pub fn entry(&self, stage: &str, key: &str) -> Result<PathBuf, PipelineError> {
        let dir = self.root.join(stage);
        fs::create_dir_all(&dir).map_err(|e| PipelineError::fs(&dir, e))?;
        Ok(dir.join(key))
    }

    pub fn record(&mut self, stage: &str, key: &str, hit: bool) {
        self.events.push(CacheEvent {
            stage: stage.into(),
            key: key.into(),
            hit,
        });
    }

    pub fn events(&self) -> &[CacheEvent] {
        &self.events
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self, PipelineError> {
        let sha256 = if path.is_dir() { digest_dir(path)? } else { digest_file(path)? };
        Ok(Self {
            path: path.display().to_string(),
            sha256,
        })
    }
}

/// Machine-readable record of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
    pub config_hash: Option<String>,
    /// The effective configuration, echoed verbatim.
    pub config: Option<serde_json::Value>,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub cache: Vec<CacheEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Manifest {
    pub fn start(command: &str) -> Self {
        Self {
            tool: "tcsdet".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            status: "running".into(),
            started_at: Utc::now(),
            finished_at: None,
            config_hash: None,
            config: None,
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            cache: Vec::new(),
            error: None,
        }
    }

    pub fn with_config<T: Serialize>(mut self, config: &T, hash: String) -> Self {
        self.config = serde_json::to_value(config).ok();
        self.config_hash = Some(hash);
        self
    }

    pub fn finish(&mut self, result: Result<(), String>) {
        self.finished_at = Some(Utc::now());
        match result {
            Ok(()) => self.status = "ok".into(),
            Err(e) => {
                self.status = "error".into();
                self.error = Some(e);
            }
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), PipelineError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| PipelineError::fs(parent, e))?;
        }
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| PipelineError::fs(path, e))
    }
}
