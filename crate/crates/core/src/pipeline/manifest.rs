//! Run manifest: per stage, the hashes of everything read and written plus
//! the parameters used. No timestamps, so identical runs give identical
//! manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Hash over engine version, inputs and parameters.
    pub fingerprint: String,
    pub inputs: BTreeMap<String, String>,
    pub params: Value,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub engine: String,
    pub version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            engine: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            stages: BTreeMap::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub fn fingerprint(stage: &str, inputs: &BTreeMap<String, String>, params: &Value) -> String {
    let doc = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "stage": stage,
        "inputs": inputs,
        "params": params,
    });
    sha256_hex(doc.to_string().as_bytes())
}

impl Manifest {
    /// Reads the manifest in `dir`; a missing or unreadable one starts fresh.
    pub fn load_or_default(dir: &Path) -> Manifest {
        let path = dir.join(MANIFEST_FILE);
        let Ok(text) = fs::read_to_string(&path) else {
            return Manifest::default();
        };
        match serde_json::from_str::<Manifest>(&text) {
            Ok(m) if m.version == env!("CARGO_PKG_VERSION") => m,
            Ok(_) => {
                log::warn!("manifest written by another engine version; ignoring it");
                Manifest::default()
            }
            Err(e) => {
                log::warn!("unreadable manifest {}: {e}; ignoring it", path.display());
                Manifest::default()
            }
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    /// True when `stage` last ran with `fingerprint` and its outputs are
    /// still on disk unchanged.
    pub fn is_current(&self, stage: &str, fingerprint: &str, dir: &Path) -> bool {
        let Some(rec) = self.stages.get(stage) else {
            return false;
        };
        rec.fingerprint == fingerprint
            && rec
                .outputs
                .iter()
                .all(|(name, hash)| sha256_file(&dir.join(name)).is_ok_and(|h| &h == hash))
    }
}
