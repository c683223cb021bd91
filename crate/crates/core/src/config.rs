// SPDX-License-Identifier: Apache-2.0

//! TOML run configuration. Every field has a default, so an empty document
//! describes a complete run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::FuzzySystemConfig;
use crate::pfr::PfrParams;
use crate::scenario::ScenarioConfig;
use crate::strategy::{StrategyKind, ThresholdParams};
use crate::workload::WorkloadParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub strategy: StrategyKind,
    pub intervals: u32,
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub fuzzy: FuzzySystemConfig,
    pub pfr: PfrParams,
    pub cascade: ThresholdParams,
    pub workload: WorkloadParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            strategy: StrategyKind::Pfr,
            intervals: 50,
            seed: 1,
            scenario: ScenarioConfig::default(),
            fuzzy: FuzzySystemConfig::default(),
            pfr: PfrParams::default(),
            cascade: ThresholdParams::default(),
            workload: WorkloadParams::default(),
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals < 1 {
            return Err(Error::config("intervals must be >= 1"));
        }
        self.fuzzy.validate()?;
        self.pfr.validate()?;
        self.cascade.validate()?;
        self.workload.validate()?;
        self.scenario.resolve()?;
        Ok(())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
