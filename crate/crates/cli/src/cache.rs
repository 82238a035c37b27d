//! Content-addressed result cache.
//!
//! Each record lives in `<dir>/<digest>.json` as
//! `{"meta": {..., "payload_sha256": h}, "payload": ...}`; the payload
//! hash is re-validated on every load, and a mismatch aborts with the
//! cache-corruption exit code.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::json::to_canonical_string;
use crate::CliError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

/// Digest of a canonical request description (command plus every flag
/// that influences the result).
pub fn request_digest(parts: &[(&str, String)]) -> String {
    let mut canon = format!("v={ARTIFACT_VERSION}");
    for (k, v) in parts {
        canon.push(';');
        canon.push_str(k);
        canon.push('=');
        canon.push_str(v);
    }
    sha256_hex(canon.as_bytes())
}

pub struct FileCache {
    dir: PathBuf,
}

pub struct CacheHit {
    pub payload: Value,
    pub created_unix: u64,
}

impl FileCache {
    pub fn new(dir: &Path) -> Self {
        FileCache { dir: dir.to_path_buf() }
    }

    fn path_for(&self, digest: &str) -> PathBuf {
        self.dir.join(format!("{digest}.json"))
    }

    /// Loads a record, re-validating the stored payload hash.
    pub fn get(&self, digest: &str) -> Result<Option<CacheHit>, CliError> {
        let path = self.path_for(digest);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(_) => return Ok(None),
        };
        let doc: Value = serde_json::from_str(&text).map_err(|e| {
            CliError::CacheCorruption(format!("{}: unparsable record: {e}", path.display()))
        })?;
        let payload = doc
            .get("payload")
            .cloned()
            .ok_or_else(|| CliError::CacheCorruption(format!("{}: no payload", path.display())))?;
        let stored_hash = doc
            .pointer("/meta/payload_sha256")
            .and_then(|v| v.as_str())
            .ok_or_else(|| {
                CliError::CacheCorruption(format!("{}: no payload hash", path.display()))
            })?;
        let actual = sha256_hex(to_canonical_string(&payload).as_bytes());
        if actual != stored_hash {
            return Err(CliError::CacheCorruption(format!(
                "{}: payload hash mismatch (stored {stored_hash}, recomputed {actual})",
                path.display()
            )));
        }
        let created_unix = doc
            .pointer("/meta/created_unix")
            .and_then(|v| v.as_u64())
            .unwrap_or(0);
        Ok(Some(CacheHit { payload, created_unix }))
    }

    /// Stores a record for the digest.
    pub fn put(&self, digest: &str, command: &str, payload: &Value) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir)?;
        let payload_text = to_canonical_string(payload);
        let record = json!({
            "meta": {
                "command": command,
                "params_digest": digest,
                "artifact_version": ARTIFACT_VERSION,
                "created_unix": SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                "payload_sha256": sha256_hex(payload_text.as_bytes()),
            },
            "payload": payload,
        });
        std::fs::write(self.path_for(digest), to_canonical_string(&record))?;
        Ok(())
    }
}

/// Resolves the cache directory: flag, then RELLICH_CACHE, then ./cache.
pub fn resolve_cache_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("RELLICH_CACHE") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("cache")
}
