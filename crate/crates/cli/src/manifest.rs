//! Run manifest: config hash, toolkit version, timestamps, and per-series
//! run status. The manifest is the one output whose bytes may differ
//! between identical runs (timestamps).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the exact config bytes; stable across machines.
    pub config_sha256: String,
    pub toolkit_version: String,
    pub started_at: String,
    pub finished_at: String,
    /// series id -> "ok" or "failed: <reason>".
    pub series_status: BTreeMap<String, String>,
}

pub fn config_hash(config_bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(config_bytes))
}
