//! Run manifests: every file the tool writes is paired with a manifest that
//! records the command, its full parameter set, the master seed, tool
//! version and timestamp, so a run can be reproduced from the manifest
//! alone. Statistical outputs depend only on the recorded parameters, never
//! on the timestamp.

use serde::Serialize;

pub const SCHEMA: &str = "squarefall/v1";

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub command: String,
    pub args: serde_json::Value,
    pub master_seed: Option<u64>,
    pub version: &'static str,
    pub timestamp_unix: u64,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, args: serde_json::Value, master_seed: Option<u64>) -> Self {
        Manifest {
            schema: SCHEMA,
            command: command.to_string(),
            args,
            master_seed,
            version: env!("CARGO_PKG_VERSION"),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs: Vec::new(),
        }
    }
}
