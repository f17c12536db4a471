use serde::{Deserialize, Serialize};

use crate::algorithms::AgentRun;
use crate::env::InstanceProfile;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Cumulative pseudo-regret of one run, `values[k]` after play `k + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretSeries {
    pub run_id: String,
    pub algo: String,
    pub instance_id: String,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl RegretSeries {
    pub fn terminal(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Gaps summed in play order.
pub fn pseudo_regret<F: Scalar>(run: &AgentRun<F>, profile: &InstanceProfile) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    run.plays
        .iter()
        .map(|p| {
            let gap = profile
                .gaps
                .get(p.arm)
                .ok_or(Error::ArmOutOfRange { arm: p.arm, arms: profile.gaps.len() })?;
            acc += gap;
            Ok(acc)
        })
        .collect()
}

/// Per-step mean and sample standard deviation across series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algo: String,
    pub t: u64,
    pub mean_regret: f64,
    pub std_regret: f64,
}

/// Summary over `series` (all of one algorithm), truncated to the shortest.
///
/// The standard deviation uses `n - 1` in the denominator and is 0 for a
/// single series.
pub fn summarize(algo: &str, series: &[&RegretSeries]) -> Vec<SummaryRow> {
    let len = series.iter().map(|s| s.values.len()).min().unwrap_or(0);
    let n = series.len() as f64;
    (0..len)
        .map(|k| {
            let mean = series.iter().map(|s| s.values[k]).sum::<f64>() / n;
            let std = if series.len() > 1 {
                (series.iter().map(|s| (s.values[k] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            SummaryRow { algo: algo.to_string(), t: k as u64 + 1, mean_regret: mean, std_regret: std }
        })
        .collect()
}
