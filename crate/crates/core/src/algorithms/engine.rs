//! Round-robin successive elimination over an active set.
//!
//! One call to [`run_segment`] plays rounds of the active arms in ascending
//! index order, ingests feedback, evaluates the bounds of every active arm
//! against the pre-elimination set, and removes all dominated arms at once.

use crate::bounds::{self, BoundContext};
use crate::env::{Environment, FeedbackEvent, PayoffSense};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::ArmTracker;

use super::{AgentOptions, AgentRun, Elimination, Play, SegmentRecord, Status};

/// Elimination rule applied after every full round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rule<F> {
    /// Drop `i` if `min(UCB(j), B) < LCB(i)` for some active `j`.
    CostThreshold(F),
    /// Drop `i` if `max(LCB(j), B) > UCB(i)` for some active `j`.
    RewardThreshold(F),
    /// Cost-side conservative rule with partial-knowledge bounds.
    PartialKnowledge,
    /// Plain elimination on the full-information window only.
    FullInformation(PayoffSense),
}

impl<F: Scalar> Rule<F> {
    fn can_fail(&self) -> bool {
        matches!(self, Rule::CostThreshold(_) | Rule::RewardThreshold(_))
    }
}

/// Trackers and bookkeeping that may outlive a single segment.
#[derive(Debug)]
pub(crate) struct AgentState<F> {
    pub trackers: Vec<ArmTracker<F>>,
    /// Plays before this time belong to discarded history.
    pub history_start: u64,
    /// `(from_time, active set size)` change points since `history_start`.
    widths: Vec<(u64, usize)>,
    events: Vec<FeedbackEvent>,
}

impl<F: Scalar> AgentState<F> {
    pub fn new(arms: usize, start: u64) -> Self {
        Self {
            trackers: (0..arms).map(ArmTracker::new).collect(),
            history_start: start,
            widths: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn reset(&mut self, start: u64) {
        let arms = self.trackers.len();
        self.trackers = (0..arms).map(ArmTracker::new).collect();
        self.history_start = start;
        self.widths.clear();
    }

    fn note_width(&mut self, from: u64, width: usize) {
        if self.widths.last().map(|&(_, w)| w) != Some(width) {
            self.widths.push((from, width));
        }
    }

    /// Smallest round-robin width in effect during `[t - D, t]`.
    fn min_recent_width(&self, t: u64, max_delay: u64) -> usize {
        let window_start = t.saturating_sub(max_delay);
        let mut best = usize::MAX;
        for &(from, w) in self.widths.iter().rev() {
            best = best.min(w);
            if from <= window_start {
                break;
            }
        }
        best
    }

    fn ingest(&mut self, env: &mut Environment) -> Result<()> {
        let t = env.now();
        self.events.clear();
        env.observed_before_into(t, &mut self.events)?;
        for ev in &self.events {
            if ev.play_time < self.history_start {
                continue;
            }
            self.trackers[ev.arm].record_feedback(ev)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct ArmBounds<F> {
    arm: usize,
    lcb: F,
    ucb: F,
}

/// Run one elimination segment with at most `budget` plays.
pub(crate) fn run_segment<F: Scalar>(
    env: &mut Environment,
    budget: u64,
    rule: Rule<F>,
    opts: &AgentOptions,
    state: &mut AgentState<F>,
    run: &mut AgentRun<F>,
) -> Result<Status> {
    let start = env.now();
    let k = env.num_arms();
    let max_delay = env.max_delay();
    let mut active: Vec<usize> = (0..k).collect();
    let mut used = 0u64;
    let base_ctx = BoundContext::<F>::with_constants(budget, max_delay, k, opts.constants);
    let mut bounds_buf: Vec<ArmBounds<F>> = Vec::with_capacity(k);

    let status = loop {
        if used >= budget {
            break Status::Success;
        }
        state.note_width(env.now(), active.len());
        let round = (active.len() as u64).min(budget - used) as usize;
        for &arm in &active[..round] {
            let s = env.play(arm)?;
            state.trackers[arm].record_play(s)?;
            run.plays.push(Play { t: s, arm });
        }
        used += round as u64;
        state.ingest(env)?;
        if round < active.len() {
            break Status::Success;
        }

        let t = env.now();
        let width = if opts.keep_history {
            state.min_recent_width(t, max_delay as u64)
        } else {
            active.len()
        };
        let ctx = base_ctx.with_active(width);
        bounds_buf.clear();
        for &arm in &active {
            let tracker = &state.trackers[arm];
            let snap = tracker.snapshot(t, max_delay)?;
            let (lcb, ucb) = match rule {
                Rule::CostThreshold(_) => (bounds::lcb_cost(&snap, &ctx)?.lcb, bounds::ucb_cost(&snap, &ctx)),
                Rule::RewardThreshold(_) => (bounds::lcb_reward(&snap, &ctx), bounds::ucb_reward(&snap, &ctx)?.ucb),
                Rule::PartialKnowledge => {
                    if snap.n == 0 {
                        return Err(Error::UnplayedArm { arm });
                    }
                    bounds::sepk_bounds(&snap, tracker.plays_in_window(t, max_delay), &ctx)
                }
                Rule::FullInformation(_) => bounds::full_info_interval(&snap, &ctx),
            };
            bounds_buf.push(ArmBounds { arm, lcb, ucb });
        }

        let min_ucb = bounds_buf.iter().map(|b| b.ucb).fold(F::infinity(), F::min);
        let max_lcb = bounds_buf.iter().map(|b| b.lcb).fold(F::neg_infinity(), F::max);
        let dominated = |b: &ArmBounds<F>| -> bool {
            match rule {
                Rule::CostThreshold(threshold) => min_ucb.min(threshold) < b.lcb,
                Rule::RewardThreshold(threshold) => max_lcb.max(threshold) > b.ucb,
                Rule::PartialKnowledge | Rule::FullInformation(PayoffSense::Cost) => min_ucb < b.lcb,
                Rule::FullInformation(PayoffSense::Reward) => max_lcb > b.ucb,
            }
        };
        let removed: Vec<usize> = bounds_buf.iter().filter(|b| dominated(b)).map(|b| b.arm).collect();
        if removed.is_empty() {
            continue;
        }
        // Conservative rules never empty the set; a pass that would is skipped.
        if removed.len() == active.len() && !rule.can_fail() {
            continue;
        }
        let before = active.len();
        for &arm in &removed {
            run.eliminations.push(Elimination { t, arm, active_count: before });
        }
        active.retain(|a| !removed.contains(a));
        if active.is_empty() {
            break Status::Fail;
        }
    };

    run.segments.push(SegmentRecord {
        start,
        steps: used,
        threshold: match rule {
            Rule::CostThreshold(b) | Rule::RewardThreshold(b) => Some(b),
            _ => None,
        },
        status,
        final_active: active.clone(),
    });
    run.steps_used += used;
    run.status = status;
    Ok(status)
}
