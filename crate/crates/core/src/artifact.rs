//! Content-addressed artifact store.
//!
//! Each artifact is pretty-printed JSON at `<root>/<kind>/<sha256>.json`, where
//! the hash covers the file bytes. Run metadata that varies between runs (the
//! run id timestamp) lives in `<root>/runs/<run id>.json` and points at content
//! files, so content files are byte-identical across replays.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::hashing::sha256_hex;

/// Writes via a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredArtifact {
    pub kind: String,
    pub hash: String,
    pub path: PathBuf,
}

/// Entry in `runs/`: what a command consumed and produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub command: String,
    pub tool_version: String,
    pub inputs: serde_json::Value,
    pub outputs: Vec<StoredArtifact>,
}

#[derive(Clone, Debug)]
pub struct ArtifactStore {
    root: PathBuf,
}

impl ArtifactStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ArtifactStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Stores `value` under `kind`; an existing identical file is left untouched.
    pub fn put<T: Serialize>(&self, kind: &str, value: &T) -> std::io::Result<StoredArtifact> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
        bytes.push(b'\n');
        let hash = sha256_hex(&bytes);
        let path = self.root.join(kind).join(format!("{hash}.json"));
        if !path.exists() {
            write_atomic(&path, &bytes)?;
        }
        Ok(StoredArtifact { kind: kind.to_string(), hash, path })
    }

    pub fn get<T: DeserializeOwned>(path: &Path) -> std::io::Result<T> {
        let bytes = std::fs::read(path)?;
        serde_json::from_slice(&bytes).map_err(std::io::Error::other)
    }

    /// Records a run; the id is a UTC timestamp plus a hash of the outputs.
    pub fn record_run(
        &self,
        command: &str,
        inputs: serde_json::Value,
        outputs: Vec<StoredArtifact>,
    ) -> std::io::Result<PathBuf> {
        let secs =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
        let joined: Vec<&str> = outputs.iter().map(|o| o.hash.as_str()).collect();
        let run_id = format!("{secs}-{}", &sha256_hex(joined.join(",").as_bytes())[..12]);
        let record = RunRecord {
            run_id: run_id.clone(),
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            outputs,
        };
        let path = self.root.join("runs").join(format!("{run_id}.json"));
        let bytes = serde_json::to_vec_pretty(&record).map_err(std::io::Error::other)?;
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}
