//! Content-addressed cache of built Bethe vectors.
//!
//! The key hashes the chain spec, the parameter collection and the
//! backend; any change to n, L, c, xi, chi or t produces a new entry.
//! Exact vectors round-trip bit-identically through the string-rational
//! JSON encoding.  A corrupt entry is reported on stderr and rebuilt.

use std::path::PathBuf;

use bethe_core::linop::ChainVector;
use bethe_core::monodromy::ChainSpec;
use bethe_core::partitions::BetheParams;
use bethe_core::scalar::Rat;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CACHE_DIR_ENV: &str = "BETHE_CACHE_DIR";

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("./.bethe-cache"))
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    spec: &'a ChainSpec,
    t: &'a BetheParams,
    backend: &'a str,
}

pub fn content_hash(spec: &ChainSpec, t: &BetheParams, backend: &str) -> String {
    let material = KeyMaterial { spec, t, backend };
    let bytes = serde_json::to_vec(&material).expect("key material serializes");
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    hex::encode(hasher.finalize())
}

#[derive(Serialize, Deserialize)]
pub struct CachedVector {
    pub key: String,
    pub t: Vec<Vec<String>>,
    pub vector: ChainVector<Rat>,
}

fn entry_path(key: &str) -> PathBuf {
    cache_dir().join(format!("{key}.json"))
}

/// Returns the cached vector when present and intact.
pub fn load(key: &str) -> Option<ChainVector<Rat>> {
    let path = entry_path(key);
    let raw = std::fs::read_to_string(&path).ok()?;
    match serde_json::from_str::<CachedVector>(&raw) {
        Ok(entry) if entry.key == key => Some(entry.vector),
        _ => {
            eprintln!(
                "warning: cache entry '{}' is corrupt; recomputing",
                path.display()
            );
            None
        }
    }
}

pub fn store(key: &str, t: &BetheParams, vector: &ChainVector<Rat>) {
    let dir = cache_dir();
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("warning: cannot create cache dir '{}': {e}", dir.display());
        return;
    }
    let entry = CachedVector {
        key: key.to_string(),
        t: t.sets()
            .iter()
            .map(|lvl| lvl.iter().map(|x| x.to_string()).collect())
            .collect(),
        vector: vector.clone(),
    };
    let path = entry_path(key);
    match serde_json::to_string_pretty(&entry) {
        Ok(body) => {
            if let Err(e) = std::fs::write(&path, body) {
                eprintln!("warning: cannot write cache entry '{}': {e}", path.display());
            }
        }
        Err(e) => eprintln!("warning: cannot serialize cache entry: {e}"),
    }
}
