//! Reproducibility manifest attached to every report bundle.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_id: String,
    pub tool_version: String,
    /// UTC creation time; honours SOURCE_DATE_EPOCH so identical runs can
    /// produce byte-identical bundles.
    pub created_utc: String,
    pub base_seed: u64,
    /// Cross-validation seed per "zone/approachN" report.
    pub cv_seeds: BTreeMap<String, u64>,
    pub config_sha256: String,
    /// Digest per input file name.
    pub input_sha256: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(
        base_seed: u64,
        cv_seeds: BTreeMap<String, u64>,
        config_text: &str,
        inputs: BTreeMap<String, String>,
    ) -> RunManifest {
        let config_sha256 = hex_digest(config_text.as_bytes());
        // The id covers everything that determines the run's outputs; the
        // timestamp deliberately stays outside it.
        let mut hasher = Sha256::new();
        hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
        hasher.update(base_seed.to_le_bytes());
        for (k, v) in &cv_seeds {
            hasher.update(k.as_bytes());
            hasher.update(v.to_le_bytes());
        }
        hasher.update(config_sha256.as_bytes());
        for (k, v) in &inputs {
            hasher.update(k.as_bytes());
            hasher.update(v.as_bytes());
        }
        let manifest_id = hex::encode(&hasher.finalize()[..8]);

        RunManifest {
            manifest_id,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_utc: timestamp_utc(),
            base_seed,
            cv_seeds,
            config_sha256,
            input_sha256: inputs,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), String> {
        let file = std::fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)
            .map_err(|e| e.to_string())
    }
}

/// RFC 3339 timestamp, overridable via SOURCE_DATE_EPOCH for reproducible
/// bundles.
fn timestamp_utc() -> String {
    let epoch = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse::<i64>().ok());
    let time = match epoch {
        Some(secs) => chrono::DateTime::from_timestamp(secs, 0).unwrap_or_else(chrono::Utc::now),
        None => chrono::Utc::now(),
    };
    time.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

pub fn file_digest(path: &Path) -> Result<String, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(hex_digest(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_ignores_timestamp_but_tracks_inputs() {
        let seeds: BTreeMap<String, u64> = [("CangasF/approach1".to_string(), 9u64)].into();
        let inputs: BTreeMap<String, String> =
            [("stations.csv".to_string(), "abc".to_string())].into();
        let a = RunManifest::new(1, seeds.clone(), "seed = 1", inputs.clone());
        let b = RunManifest::new(1, seeds.clone(), "seed = 1", inputs.clone());
        assert_eq!(a.manifest_id, b.manifest_id);

        let c = RunManifest::new(2, seeds.clone(), "seed = 2", inputs.clone());
        assert_ne!(a.manifest_id, c.manifest_id);

        let mut other_inputs = inputs;
        other_inputs.insert("stations.csv".to_string(), "abd".to_string());
        let d = RunManifest::new(1, seeds, "seed = 1", other_inputs);
        assert_ne!(a.manifest_id, d.manifest_id);
    }
}
