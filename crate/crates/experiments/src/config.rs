use std::path::Path;

use cud_core::{AgentKind, RuleConfig, StopRule};
use serde::{Deserialize, Serialize};

use crate::{DatasetSpec, ExperimentError};

/// A sweep over datasets × voter counts × deadlines × agent kinds.
///
/// ```toml
/// name = "table1"
/// voters = [10]
/// preference_sets = 10
/// runs_per_setting = 1000
/// master_seed = 7
///
/// [[dataset]]
/// name = "Uniform5"
/// impartial_culture = 5
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetSpec>,
    pub voters: Vec<usize>,
    /// Deadlines to sweep; defaults to `2..=n+1` for each `n`.
    #[serde(default)]
    pub tau: Option<Vec<u32>>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<AgentKind>,
    #[serde(default = "default_sets")]
    pub preference_sets: usize,
    #[serde(default = "default_runs")]
    pub runs_per_setting: usize,
    /// Threshold; defaults to `n` (unanimity).
    #[serde(default)]
    pub sigma: Option<u32>,
    #[serde(default)]
    pub master_seed: u64,
    /// Defaults to [`StopRule::Singleton`], the literal protocol loop.
    #[serde(default = "default_stop")]
    pub stop: StopRule,
}

fn default_name() -> String {
    "sweep".into()
}

fn default_kinds() -> Vec<AgentKind> {
    AgentKind::ALL.to_vec()
}

fn default_stop() -> StopRule {
    StopRule::Singleton
}

fn default_sets() -> usize {
    10
}

fn default_runs() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn new(datasets: Vec<DatasetSpec>, voters: Vec<usize>) -> Self {
        ExperimentConfig {
            name: default_name(),
            datasets,
            voters,
            tau: None,
            kinds: default_kinds(),
            preference_sets: default_sets(),
            runs_per_setting: default_runs(),
            sigma: None,
            master_seed: 0,
            stop: default_stop(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn taus(&self, n: usize) -> Vec<u32> {
        self.tau
            .clone()
            .unwrap_or_else(|| (2..=n as u32 + 1).collect())
    }

    pub fn rule(&self, n: usize, tau: u32) -> Result<RuleConfig, ExperimentError> {
        let sigma = self.sigma.unwrap_or(n as u32);
        Ok(RuleConfig::majority(n, sigma, tau)?.with_stop(self.stop))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: &str| Err(ExperimentError::Config(msg.to_string()));
        if self.datasets.is_empty() {
            return bad("at least one [[dataset]] is required");
        }
        if self.voters.is_empty() || self.voters.contains(&0) {
            return bad("voters must list positive voter counts");
        }
        if self.kinds.is_empty() {
            return bad("kinds must not be empty");
        }
        if self.preference_sets == 0 || self.runs_per_setting == 0 {
            return bad("preference_sets and runs_per_setting must be at least 1");
        }
        if matches!(&self.tau, Some(t) if t.is_empty()) {
            return bad("tau must not be empty");
        }
        for &n in &self.voters {
            for tau in self.taus(n) {
                self.rule(n, tau)?;
            }
        }
        Ok(())
    }
}
