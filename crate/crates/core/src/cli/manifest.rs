//! Run manifests: everything needed to regenerate an output file.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::cli::config::{config_map, render_config};
use crate::scenario::ScenarioConfig;
use crate::simulator::{MonteCarloConfig, GENERATOR_ID};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    /// Resolved configuration, every key present.
    pub config: BTreeMap<String, String>,
    pub master_seed: u64,
    pub baseline_mode: String,
    pub generator: String,
    pub command_line: Vec<String>,
    pub timestamp_unix: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(cfg: &ScenarioConfig, mc: &MonteCarloConfig, command_line: Vec<String>) -> Self {
        Self {
            artifact: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config_map(cfg, mc).into_iter().collect(),
            master_seed: mc.master_seed,
            baseline_mode: cfg.baseline_mode.to_string(),
            generator: GENERATOR_ID.to_string(),
            command_line,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            notes: Vec::new(),
        }
    }

    /// The configuration as a `key = value` file body.
    pub fn config_text(&self) -> String {
        self.config
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Resolved config rendered for humans; same text a manifest feeds back.
pub fn describe(cfg: &ScenarioConfig, mc: &MonteCarloConfig) -> String {
    render_config(cfg, mc)
}
