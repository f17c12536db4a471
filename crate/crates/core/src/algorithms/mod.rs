//! Elimination agents for delay-as-payoff bandits.
//!
//! * [`cse_run`] / [`bdse_run`]: cost side, thresholded elimination and its
//!   doubling wrapper starting from `B = 1/D`.
//! * [`rse_run`] / [`bhse_run`]: reward side, thresholded elimination and its
//!   halving wrapper starting from `B = 1`.
//! * [`sepk_run`]: conservative cost-side elimination with partial knowledge.
//! * [`fullinfo_se_run`]: baseline that only trusts plays older than `D`.
//!
//! Wrappers restart with fresh statistics on every call unless
//! [`AgentOptions::keep_history`] is set.

mod engine;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundConstants;
use crate::env::{Environment, PayoffSense};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use engine::Rule;
use engine::{run_segment, AgentState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Success,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Play {
    pub t: u64,
    pub arm: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elimination {
    pub t: u64,
    pub arm: usize,
    /// Size of the active set just before the removal pass.
    pub active_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChange<F> {
    pub t: u64,
    pub threshold: F,
}

/// One call of the inner elimination procedure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord<F> {
    pub start: u64,
    pub steps: u64,
    pub threshold: Option<F>,
    pub status: Status,
    pub final_active: Vec<usize>,
}

/// Trace of one agent execution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct AgentRun<F> {
    pub algorithm: String,
    pub plays: Vec<Play>,
    pub eliminations: Vec<Elimination>,
    /// Initial threshold followed by every doubling or halving.
    pub threshold_history: Vec<ThresholdChange<F>>,
    pub segments: Vec<SegmentRecord<F>>,
    pub status: Status,
    pub steps_used: u64,
}

impl<F: Scalar> AgentRun<F> {
    fn new(algorithm: &str) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            plays: Vec::new(),
            eliminations: Vec::new(),
            threshold_history: Vec::new(),
            segments: Vec::new(),
            status: Status::Success,
            steps_used: 0,
        }
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Active set at the end of the last segment.
    pub fn final_active(&self) -> &[usize] {
        self.segments.last().map(|s| s.final_active.as_slice()).unwrap_or(&[])
    }

    /// Per-arm play counts.
    pub fn play_counts(&self, arms: usize) -> Vec<u64> {
        let mut counts = vec![0; arms];
        for p in &self.plays {
            counts[p.arm] += 1;
        }
        counts
    }

    /// Whether `arm` was eliminated in any segment.
    pub fn was_eliminated(&self, arm: usize) -> bool {
        self.eliminations.iter().any(|e| e.arm == arm)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Knobs shared by every agent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentOptions {
    pub constants: BoundConstants,
    /// Carry statistics and in-flight feedback across wrapper restarts.
    pub keep_history: bool,
}

/// Input of a single thresholded elimination call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdedConfig<F> {
    /// Plays available to this call.
    pub budget: u64,
    pub threshold: F,
}

impl<F: Scalar> ThresholdedConfig<F> {
    fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() || self.threshold < F::zero() {
            return Err(Error::config(format!("elimination threshold {} must be finite and >= 0", self.threshold)));
        }
        Ok(())
    }
}

fn single_thresholded<F: Scalar>(
    env: &mut Environment,
    cfg: &ThresholdedConfig<F>,
    opts: &AgentOptions,
    name: &str,
    rule: Rule<F>,
) -> Result<AgentRun<F>> {
    cfg.validate()?;
    let mut run = AgentRun::new(name);
    run.threshold_history.push(ThresholdChange { t: env.now(), threshold: cfg.threshold });
    let mut state = AgentState::new(env.num_arms(), env.now());
    let budget = cfg.budget.min(env.remaining());
    run_segment(env, budget, rule, opts, &mut state, &mut run)?;
    Ok(run)
}

/// Cost successive elimination with threshold `B`.
pub fn cse_run<F: Scalar>(env: &mut Environment, cfg: &ThresholdedConfig<F>, opts: &AgentOptions) -> Result<AgentRun<F>> {
    single_thresholded(env, cfg, opts, "cse", Rule::CostThreshold(cfg.threshold))
}

/// Reward successive elimination with threshold `B`.
pub fn rse_run<F: Scalar>(env: &mut Environment, cfg: &ThresholdedConfig<F>, opts: &AgentOptions) -> Result<AgentRun<F>> {
    single_thresholded(env, cfg, opts, "rse", Rule::RewardThreshold(cfg.threshold))
}

fn require_sense(env: &Environment, sense: PayoffSense, name: &str) -> Result<()> {
    if env.instance().sense() != sense {
        return Err(Error::config(format!("{name} is defined for {sense} instances only")));
    }
    Ok(())
}

fn wrapped<F: Scalar>(
    env: &mut Environment,
    opts: &AgentOptions,
    name: &str,
    initial: F,
    rule: fn(F) -> Rule<F>,
    update: impl Fn(F, usize) -> F,
) -> Result<AgentRun<F>> {
    let mut run = AgentRun::new(name);
    let mut threshold = initial;
    let mut failures = 0usize;
    let mut state = AgentState::new(env.num_arms(), env.now());
    run.threshold_history.push(ThresholdChange { t: env.now(), threshold });
    while env.remaining() > 0 {
        if !opts.keep_history {
            state.reset(env.now());
        }
        let status = run_segment(env, env.remaining(), rule(threshold), opts, &mut state, &mut run)?;
        if status == Status::Success {
            break;
        }
        failures += 1;
        threshold = update(threshold, failures);
        run.threshold_history.push(ThresholdChange { t: env.now(), threshold });
    }
    Ok(run)
}

/// Doubling wrapper around [`cse_run`], starting from `B = 1/D`.
pub fn bdse_run<F: Scalar>(env: &mut Environment, opts: &AgentOptions) -> Result<AgentRun<F>> {
    require_sense(env, PayoffSense::Cost, "bdse")?;
    let initial = F::one() / F::of_u64(env.max_delay() as u64);
    wrapped(env, opts, "bdse", initial, Rule::CostThreshold, |b, _| b + b)
}

/// Halving wrapper around [`rse_run`], starting from `B = 1`.
///
/// After `ceil(log2 T)` failures the threshold drops to 0, which covers
/// instances whose optimal mean is below `1/T`.
pub fn bhse_run<F: Scalar>(env: &mut Environment, opts: &AgentOptions) -> Result<AgentRun<F>> {
    require_sense(env, PayoffSense::Reward, "bhse")?;
    let cap = (env.remaining().max(2) as f64).log2().ceil() as usize;
    wrapped(env, opts, "bhse", F::one(), Rule::RewardThreshold, move |b, failures| halve_or_zero(b, failures, cap))
}

fn halve_or_zero<F: Scalar>(b: F, failures: usize, cap: usize) -> F {
    if failures >= cap {
        F::zero()
    } else {
        b / F::lit(2.0)
    }
}

fn unthresholded<F: Scalar>(env: &mut Environment, opts: &AgentOptions, name: &str, rule: Rule<F>) -> Result<AgentRun<F>> {
    let mut run = AgentRun::new(name);
    let mut state = AgentState::new(env.num_arms(), env.now());
    run_segment(env, env.remaining(), rule, opts, &mut state, &mut run)?;
    Ok(run)
}

/// Conservative successive elimination with partial knowledge (cost side).
pub fn sepk_run<F: Scalar>(env: &mut Environment, opts: &AgentOptions) -> Result<AgentRun<F>> {
    require_sense(env, PayoffSense::Cost, "sepk")?;
    unthresholded(env, opts, "sepk", Rule::PartialKnowledge)
}

/// Successive elimination using only the full-information window.
pub fn fullinfo_se_run<F: Scalar>(env: &mut Environment, opts: &AgentOptions) -> Result<AgentRun<F>> {
    let sense = env.instance().sense();
    unthresholded(env, opts, "fullinfo_se", Rule::FullInformation(sense))
}

/// Algorithms selectable by name from the experiment runner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Bdse,
    Bhse,
    Sepk,
    FullinfoSe,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Bdse, Algorithm::Bhse, Algorithm::Sepk, Algorithm::FullinfoSe];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Bdse => "bdse",
            Algorithm::Bhse => "bhse",
            Algorithm::Sepk => "sepk",
            Algorithm::FullinfoSe => "fullinfo_se",
        }
    }

    pub fn run<F: Scalar>(&self, env: &mut Environment, opts: &AgentOptions) -> Result<AgentRun<F>> {
        match self {
            Algorithm::Bdse => bdse_run(env, opts),
            Algorithm::Bhse => bhse_run(env, opts),
            Algorithm::Sepk => sepk_run(env, opts),
            Algorithm::FullinfoSe => fullinfo_se_run(env, opts),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests;
