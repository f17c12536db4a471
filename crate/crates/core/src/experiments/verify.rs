//! Monte-Carlo checks of the concentration and missing-count bounds under
//! plain round-robin play.

use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundContext};
use crate::env::{BanditInstance, Environment, FeedbackEvent};
use crate::error::{Error, Result};
use crate::rng::mix_seed;
use crate::stats::{ArmSnapshot, ArmTracker};

/// Violation counts of one bound over all checked `(trial, t, arm)` triples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub checks: u64,
    pub violations: u64,
}

impl Tally {
    fn check(&mut self, holds: bool) {
        self.checks += 1;
        self.violations += u64::from(!holds);
    }

    pub fn rate(&self) -> f64 {
        if self.checks == 0 {
            0.0
        } else {
            self.violations as f64 / self.checks as f64
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MissingBoundReport {
    pub upper: Tally,
    pub lower: Tally,
}

impl MissingBoundReport {
    pub fn upper_violation_rate(&self) -> f64 {
        self.upper.rate()
    }

    pub fn lower_violation_rate(&self) -> f64 {
        self.lower.rate()
    }
}

/// Every bound checked by [`verify_good_event`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GoodEventReport {
    pub missing: MissingBoundReport,
    /// `|mu_hat - mu| <= sqrt(2 log T / n)` for the all-plays empirical mean.
    pub empirical: Tally,
    /// `mu_minus <= mu_hat <= mu_plus`; holds deterministically.
    pub estimator_order: Tally,
    pub cost_lcb: Tally,
    pub cost_ucb: Tally,
    pub reward_lcb: Tally,
    pub reward_ucb: Tally,
    pub sepk_lcb: Tally,
    pub sepk_ucb: Tally,
}

impl GoodEventReport {
    /// Largest violation rate among the confidence-interval checks.
    pub fn worst_interval_rate(&self) -> f64 {
        [self.cost_lcb, self.cost_ucb, self.reward_lcb, self.reward_ucb, self.sepk_lcb, self.sepk_ucb]
            .iter()
            .map(Tally::rate)
            .fold(0.0, f64::max)
    }

    pub fn merge(&mut self, other: &GoodEventReport) {
        let add = |a: &mut Tally, b: &Tally| {
            a.checks += b.checks;
            a.violations += b.violations;
        };
        add(&mut self.missing.upper, &other.missing.upper);
        add(&mut self.missing.lower, &other.missing.lower);
        add(&mut self.empirical, &other.empirical);
        add(&mut self.estimator_order, &other.estimator_order);
        add(&mut self.cost_lcb, &other.cost_lcb);
        add(&mut self.cost_ucb, &other.cost_ucb);
        add(&mut self.reward_lcb, &other.reward_lcb);
        add(&mut self.reward_ucb, &other.reward_ucb);
        add(&mut self.sepk_lcb, &other.sepk_lcb);
        add(&mut self.sepk_ucb, &other.sepk_ucb);
    }
}

/// State visible to a per-step check.
pub struct RoundRobinStep<'a> {
    pub t: u64,
    pub arm: usize,
    pub tracker: &'a ArmTracker<f64>,
    pub snapshot: ArmSnapshot<f64>,
    /// Mean of all realised payoffs of the arm, missing ones included.
    pub empirical_mean: f64,
}

/// Round-robin arms `0..width` for `horizon` plays; after every play call
/// `check` once per arm of the set.
pub fn simulate_round_robin(
    instance: &BanditInstance,
    width: usize,
    horizon: u64,
    seed: u64,
    mut check: impl FnMut(&RoundRobinStep<'_>),
) -> Result<()> {
    if width == 0 || width > instance.num_arms() {
        return Err(Error::config(format!("round-robin width {width} must be in 1..={}", instance.num_arms())));
    }
    let d = instance.max_delay();
    let mut env = Environment::new(instance.clone(), horizon, seed);
    let mut trackers: Vec<ArmTracker<f64>> = (0..width).map(ArmTracker::new).collect();
    let mut realised = vec![0.0f64; width];
    let mut events: Vec<FeedbackEvent> = Vec::new();
    for step in 0..horizon {
        let arm = (step % width as u64) as usize;
        let s = env.play(arm)?;
        trackers[arm].record_play(s)?;
        let delay = env.play_log().last().expect("just played").delay;
        realised[arm] += delay as f64 / d as f64;
        let t = env.now();
        events.clear();
        env.observed_before_into(t, &mut events)?;
        for ev in &events {
            trackers[ev.arm].record_feedback(ev)?;
        }
        for (i, tracker) in trackers.iter().enumerate() {
            let snapshot = tracker.snapshot(t, d)?;
            let empirical_mean = realised[i] / snapshot.n.max(1) as f64;
            check(&RoundRobinStep { t, arm: i, tracker, snapshot, empirical_mean });
        }
    }
    Ok(())
}

/// Check `m_t(i) <= 2 d(i)/R + 16 log T + 2` and
/// `m_t(i) >= ((n_t(i) - n_{t-D}(i)) mu(i) - 1)/2 - 4 log T` at every step.
pub fn verify_missing_bounds(
    instance: &BanditInstance,
    width: usize,
    horizon: u64,
    trials: usize,
    base_seed: u64,
) -> Result<MissingBoundReport> {
    if trials == 0 {
        return Err(Error::config("need at least one trial"));
    }
    let means = instance.means();
    let d = instance.max_delay();
    let log_t = (horizon.max(2) as f64).ln();
    let mut report = MissingBoundReport::default();
    for trial in 0..trials {
        simulate_round_robin(instance, width, horizon, mix_seed(base_seed, trial as u64), |st| {
            check_missing(&mut report, st, means[st.arm], d, width, log_t);
        })?;
    }
    Ok(report)
}

fn check_missing(report: &mut MissingBoundReport, st: &RoundRobinStep<'_>, mu: f64, d: u32, width: usize, log_t: f64) {
    let m = st.snapshot.m as f64;
    let expected_delay = mu * d as f64;
    report.upper.check(m <= 2.0 * expected_delay / width as f64 + 16.0 * log_t + 2.0);
    let recent = st.tracker.plays_in_window(st.t, d) as f64;
    report.lower.check(m >= (recent * mu - 1.0) / 2.0 - 4.0 * log_t);
}

/// Round-robin over all arms, checking the missing-count bounds, the
/// empirical-mean concentration, and that every confidence interval used
/// by the agents contains the true mean.
pub fn verify_good_event(instance: &BanditInstance, horizon: u64, trials: usize, base_seed: u64) -> Result<GoodEventReport> {
    if trials == 0 {
        return Err(Error::config("need at least one trial"));
    }
    let k = instance.num_arms();
    let means = instance.means();
    let d = instance.max_delay();
    let ctx = BoundContext::<f64>::new(horizon, d, k);
    let mut report = GoodEventReport::default();
    let tol = 1e-12;
    for trial in 0..trials {
        simulate_round_robin(instance, k, horizon, mix_seed(base_seed, trial as u64), |st| {
            let mu = means[st.arm];
            check_missing(&mut report.missing, st, mu, d, k, ctx.log_t);
            let snap = &st.snapshot;
            if snap.n == 0 {
                return;
            }
            let r = bounds::conf_radius(snap.n, ctx.log_t);
            report.empirical.check((st.empirical_mean - mu).abs() <= r);
            report
                .estimator_order
                .check(snap.mu_minus <= st.empirical_mean + tol && st.empirical_mean <= snap.mu_plus + tol);
            let cost_lcb = bounds::lcb_cost(snap, &ctx).expect("played arm").lcb;
            report.cost_lcb.check(cost_lcb <= mu);
            report.cost_ucb.check(mu <= bounds::ucb_cost(snap, &ctx));
            report.reward_lcb.check(bounds::lcb_reward(snap, &ctx) <= mu);
            report.reward_ucb.check(mu <= bounds::ucb_reward(snap, &ctx).expect("played arm").ucb);
            let (lo, hi) = bounds::sepk_bounds(snap, st.tracker.plays_in_window(st.t, d), &ctx);
            report.sepk_lcb.check(lo <= mu);
            report.sepk_ucb.check(mu <= hi);
        })?;
    }
    Ok(report)
}
