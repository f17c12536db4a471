use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{AgentOptions, Algorithm};
use crate::bounds::BoundConstants;
use crate::env::{Delay, PayoffSense};
use crate::error::{Error, Result};

use super::generators::DistributionFamily;

fn default_horizon() -> u64 {
    150_000
}
fn default_arms() -> usize {
    30
}
fn default_max_delay() -> Delay {
    5000
}
fn default_seeds() -> usize {
    10
}
fn default_stride() -> u64 {
    1
}
fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Bdse, Algorithm::FullinfoSe]
}
fn default_dist() -> DistributionFamily {
    DistributionFamily::TruncNormal
}

/// Everything needed to reproduce an experiment. Unset fields take the
/// defaults `T = 150000, K = 30, D = 5000`, 10 seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: u64,
    #[serde(rename = "K", default = "default_arms")]
    pub arms: usize,
    #[serde(rename = "D", default = "default_max_delay")]
    pub max_delay: Delay,
    #[serde(rename = "dist", default = "default_dist")]
    pub distribution: DistributionFamily,
    /// Cost when unset, unless the family fixes the sense.
    #[serde(default)]
    pub sense: Option<PayoffSense>,
    #[serde(rename = "algos", default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(rename = "out", default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub keep_history: bool,
    /// Reuse the instance of seed 0 for every seed.
    #[serde(default)]
    pub fixed_instance: bool,
    #[serde(default)]
    pub constants: BoundConstants,
    /// Write every `series_every`-th step of each series (the last step is always written).
    #[serde(default = "default_stride")]
    pub series_every: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
            arms: default_arms(),
            max_delay: default_max_delay(),
            distribution: default_dist(),
            sense: None,
            algorithms: default_algorithms(),
            seeds: default_seeds(),
            base_seed: 0,
            output: None,
            keep_history: false,
            fixed_instance: false,
            constants: BoundConstants::default(),
            series_every: default_stride(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn agent_options(&self) -> AgentOptions {
        AgentOptions { constants: self.constants, keep_history: self.keep_history }
    }

    /// Sense of the generated instances.
    pub fn effective_sense(&self) -> Result<PayoffSense> {
        match (self.distribution.forced_sense(self.arms, self.max_delay), self.sense) {
            (Some(forced), Some(asked)) if forced != asked => Err(Error::config(format!(
                "distribution {} produces {forced} instances, but sense {asked} was requested",
                self.distribution
            ))),
            (Some(forced), _) => Ok(forced),
            (None, asked) => Ok(asked.unwrap_or(PayoffSense::Cost)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::config("T must be >= 1"));
        }
        if self.max_delay == 0 {
            return Err(Error::config("D must be >= 1"));
        }
        if self.seeds == 0 {
            return Err(Error::config("need at least one seed"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("no algorithms selected"));
        }
        if self.series_every == 0 {
            return Err(Error::config("series_every must be >= 1"));
        }
        let sense = self.effective_sense()?;
        for algo in &self.algorithms {
            let ok = match algo {
                Algorithm::Bdse | Algorithm::Sepk => sense == PayoffSense::Cost,
                Algorithm::Bhse => sense == PayoffSense::Reward,
                Algorithm::FullinfoSe => true,
            };
            if !ok {
                return Err(Error::config(format!("{algo} cannot run on {sense} instances")));
            }
        }
        Ok(())
    }
}
