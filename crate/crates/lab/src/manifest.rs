//! `manifest.json`: config hash, seeds, crate versions and a content hash for
//! every file a run wrote.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub seeds: BTreeMap<String, u64>,
    pub versions: BTreeMap<String, String>,
    /// File name to SHA-256 of its bytes.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new<'a>(
        command: &str,
        config: &ExperimentConfig,
        files: impl IntoIterator<Item = (&'a str, &'a [u8])>,
    ) -> Self {
        let seeds = BTreeMap::from([("solver".to_string(), config.solver.seed)]);
        let versions = BTreeMap::from([
            ("dumbbell-lab".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("dumbbell-core".to_string(), dumbbell_core::VERSION.to_string()),
        ]);
        Manifest {
            command: command.to_string(),
            config_sha256: sha256_hex(config.canonical_json().as_bytes()),
            seeds,
            versions,
            files: files.into_iter().map(|(n, b)| (n.to_string(), sha256_hex(b))).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashes_files_and_config() {
        let cfg = ExperimentConfig::default();
        let m = Manifest::new("mesh", &cfg, [("a.txt", b"abc".as_slice())]);
        assert_eq!(m.files["a.txt"], "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(m.config_sha256.len(), 64);
        assert_eq!(m.seeds["solver"], 0);
        let other = ExperimentConfig { solver: crate::config::SolverConfig { seed: 7, ..cfg.solver.clone() }, ..cfg };
        assert_ne!(Manifest::new("mesh", &other, []).config_sha256, m.config_sha256);
    }
}
