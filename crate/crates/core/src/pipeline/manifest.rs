//! Provenance record written next to every run's outputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::PipelineError;
use crate::rng::RNG_ALGORITHM;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub base: u64,
    pub synth: u64,
}

/// Content hashes of one stage's inputs and outputs, keyed by path.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub format_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub rng_algorithm: String,
    pub seeds: Seeds,
    pub config: ExperimentConfig,
    /// Keyed by stage name, e.g. `train/hardness/svr`.
    pub stages: BTreeMap<String, StageRecord>,
}

impl ExperimentManifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            format_version: MANIFEST_FORMAT_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            seeds: Seeds {
                base: config.seed,
                synth: config.synth.truth.seed,
            },
            config: config.clone(),
            stages: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let m: Self =
            serde_json::from_str(text).map_err(|e| PipelineError::InvalidInput(format!("manifest: {e}")))?;
        if m.format_version != MANIFEST_FORMAT_VERSION {
            return Err(PipelineError::InvalidInput(format!(
                "manifest format version {} is not supported",
                m.format_version
            )));
        }
        m.config.validate()?;
        Ok(m)
    }

    /// Compares a freshly produced stage against the recorded one.
    pub fn check_stage(&self, name: &str, produced: &StageRecord) -> Result<(), PipelineError> {
        let Some(expected) = self.stages.get(name) else {
            return Ok(());
        };
        for (path, hash) in &expected.outputs {
            let found = produced.outputs.get(path).cloned().unwrap_or_else(|| "<missing>".into());
            if &found != hash {
                return Err(PipelineError::Irreproducible {
                    path: path.clone(),
                    expected: hash.clone(),
                    found,
                });
            }
        }
        Ok(())
    }
}
