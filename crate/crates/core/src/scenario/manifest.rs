use std::path::PathBuf;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::ScenarioConfig;

/// Record of one run: what was configured and what was written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario_id: String,
    pub config_hash: String,
    pub engine_version: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(config: &ScenarioConfig, outputs: Vec<PathBuf>) -> Self {
        RunManifest {
            scenario_id: config.id.clone(),
            config_hash: config.config_hash(),
            engine_version: crate::VERSION.to_string(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            outputs,
        }
    }
}
