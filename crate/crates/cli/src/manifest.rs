use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Provenance block attached to every artifact the tool writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// The subcommand and flags as parsed, in canonical order.
    pub command: Vec<String>,
    pub config: serde_json::Value,
    /// SHA-256 over the canonical config and any input file.
    pub input_hash: String,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: Vec<String>, config: serde_json::Value, input: Option<&[u8]>) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config.to_string().as_bytes());
        if let Some(bytes) = input {
            hasher.update(bytes);
        }
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config,
            input_hash: hex::encode(hasher.finalize()),
            wall_time_s: 0.0,
        }
    }

    pub fn finish(mut self, elapsed: Duration) -> Self {
        self.wall_time_s = elapsed.as_secs_f64();
        self
    }
}
