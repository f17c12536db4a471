//! Per-arm counts and sums behind every confidence bound.
//!
//! At time `t` a play `s` of arm `i` is *missing* if `s + d_s >= t` and
//! *observed* otherwise. The full-information window holds the plays with
//! `s + D < t`; their feedback has necessarily been observed.

use std::collections::BTreeSet;

use crate::env::{Delay, FeedbackEvent};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Point-in-time estimates for one arm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmSnapshot<F> {
    pub arm: usize,
    pub t: u64,
    /// Plays so far, `n_t(i)`.
    pub n: usize,
    /// Missing plays, `m_t(i)`.
    pub m: usize,
    /// Missing plays credited with their elapsed time `(t - s)/D`.
    pub mu_minus: F,
    /// Missing plays credited with the maximal payoff 1.
    pub mu_plus: F,
    /// Mean over the full-information window (0 when the window is empty).
    pub mu_full: F,
    /// Size of the full-information window.
    pub n_full: usize,
}

/// Play and feedback bookkeeping for a single arm.
#[derive(Clone, Debug)]
pub struct ArmTracker<F> {
    arm: usize,
    play_times: Vec<u64>,
    payoffs: Vec<Option<F>>,
    outstanding: BTreeSet<u64>,
    outstanding_time_sum: u128,
    sum_observed: F,
    count_observed: usize,
    // prefix_sums[k] = payoff sum of the first k plays; grows while the
    // earliest unknown payoff gets filled in.
    prefix_sums: Vec<F>,
}

impl<F: Scalar> ArmTracker<F> {
    pub fn new(arm: usize) -> Self {
        Self {
            arm,
            play_times: Vec::new(),
            payoffs: Vec::new(),
            outstanding: BTreeSet::new(),
            outstanding_time_sum: 0,
            sum_observed: F::zero(),
            count_observed: 0,
            prefix_sums: vec![F::zero()],
        }
    }

    pub fn arm(&self) -> usize {
        self.arm
    }

    pub fn plays(&self) -> usize {
        self.play_times.len()
    }

    pub fn missing(&self) -> usize {
        self.outstanding.len()
    }

    pub fn observed(&self) -> usize {
        self.count_observed
    }

    pub fn play_times(&self) -> &[u64] {
        &self.play_times
    }

    pub fn sum_observed(&self) -> F {
        self.sum_observed
    }

    pub fn record_play(&mut self, s: u64) -> Result<()> {
        if let Some(&last) = self.play_times.last() {
            if s <= last {
                return Err(Error::NonMonotonePlay { arm: self.arm, last, got: s });
            }
        }
        self.play_times.push(s);
        self.payoffs.push(None);
        self.outstanding.insert(s);
        self.outstanding_time_sum += s as u128;
        Ok(())
    }

    pub fn record_feedback(&mut self, event: &FeedbackEvent) -> Result<()> {
        let s = event.play_time;
        if event.arm != self.arm || !self.outstanding.remove(&s) {
            return Err(Error::UnknownPlay { arm: self.arm, play_time: s });
        }
        let idx = self.play_times.binary_search(&s).expect("outstanding plays are recorded");
        let payoff = event.payoff_as::<F>();
        self.payoffs[idx] = Some(payoff);
        self.outstanding_time_sum -= s as u128;
        self.sum_observed = self.sum_observed + payoff;
        self.count_observed += 1;
        while let Some(Some(p)) = self.payoffs.get(self.prefix_sums.len() - 1) {
            let next = *self.prefix_sums.last().expect("non-empty") + *p;
            self.prefix_sums.push(next);
        }
        Ok(())
    }

    /// Plays with `s <= t - D`, i.e. `n_{t-D}(i)`.
    pub fn plays_up_to(&self, t: u64, max_delay: Delay) -> usize {
        self.play_times.partition_point(|&s| s + max_delay as u64 <= t)
    }

    /// Plays in the last `D` steps, `n_t(i) - n_{t-D}(i)`.
    pub fn plays_in_window(&self, t: u64, max_delay: Delay) -> usize {
        self.plays() - self.plays_up_to(t, max_delay)
    }

    /// Size of the full-information window at `t`.
    pub fn full_info_count(&self, t: u64, max_delay: Delay) -> usize {
        self.play_times.partition_point(|&s| s + (max_delay as u64) < t)
    }

    pub fn snapshot(&self, t: u64, max_delay: Delay) -> Result<ArmSnapshot<F>> {
        let d = max_delay as u64;
        if let Some(&oldest) = self.outstanding.first() {
            if oldest + d < t {
                return Err(Error::MissingFeedback { arm: self.arm, play_time: oldest, t });
            }
        }
        if let Some(&last) = self.play_times.last() {
            if t < last {
                return Err(Error::TimeWentBackwards { previous: last, requested: t });
            }
        }
        let n = self.plays();
        let m = self.missing();
        let n_full = self.full_info_count(t, max_delay);
        debug_assert!(n_full < self.prefix_sums.len());
        let mu_full = self.prefix_sums[n_full] / F::of_usize(n_full.max(1));
        if n == 0 {
            return Ok(ArmSnapshot {
                arm: self.arm,
                t,
                n,
                m,
                mu_minus: F::zero(),
                mu_plus: F::zero(),
                mu_full,
                n_full,
            });
        }
        let nf = F::of_usize(n);
        let elapsed = (m as u128) * (t as u128) - self.outstanding_time_sum;
        let elapsed = F::from_u128(elapsed).expect("representable") / F::of_u64(d);
        Ok(ArmSnapshot {
            arm: self.arm,
            t,
            n,
            m,
            mu_minus: (elapsed + self.sum_observed) / nf,
            mu_plus: (F::of_usize(m) + self.sum_observed) / nf,
            mu_full,
            n_full,
        })
    }
}
