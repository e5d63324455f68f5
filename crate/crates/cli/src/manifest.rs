//! Reproducibility manifest embedded in every emitted report.

use serde::Serialize;

use crate::config::FileConfig;

/// Echo of everything needed to reproduce a run: re-running the tool with
/// the embedded config and seed regenerates identical numeric content.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub master_seed: u64,
    /// Taken from `SOURCE_DATE_EPOCH` when set, `"unset"` otherwise, so
    /// identical runs emit byte-identical files.
    pub timestamp: String,
    pub config: FileConfig,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config: FileConfig, master_seed: u64, outputs: Vec<String>) -> Self {
        RunManifest {
            tool: "qnd",
            version: env!("CARGO_PKG_VERSION"),
            master_seed,
            timestamp: std::env::var("SOURCE_DATE_EPOCH").unwrap_or_else(|_| "unset".into()),
            config,
            outputs,
        }
    }
}
