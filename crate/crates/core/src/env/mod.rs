//! Delayed-feedback interaction protocol.
//!
//! Time is a global 1-based counter advanced by one per play. A play at `s`
//! with delay `d` is usable by statistics computed at time `t` iff
//! `s + d < t`; until then it is missing.

mod instance;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

pub use instance::{
    instance_profile, sample_delay, true_mean, BanditInstance, Delay, DelaySpec, InstanceFile, InstanceProfile,
    PayoffSense,
};

use crate::error::{Error, Result};
use crate::rng::DelayStreams;
use crate::scalar::Scalar;

/// Feedback for one play, delivered exactly once.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub play_time: u64,
    pub arm: usize,
    pub delay: Delay,
    pub max_delay: Delay,
}

impl FeedbackEvent {
    pub fn reveal_time(&self) -> u64 {
        self.play_time + self.delay as u64
    }

    /// Normalized payoff `d / D`.
    pub fn payoff(&self) -> f64 {
        self.payoff_as::<f64>()
    }

    pub fn payoff_as<F: Scalar>(&self) -> F {
        F::of_u64(self.delay as u64) / F::of_u64(self.max_delay as u64)
    }
}

/// One entry of the play log.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayRecord {
    pub time: u64,
    pub arm: usize,
    pub delay: Delay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Pending {
    reveal: u64,
    play_time: u64,
    arm: usize,
    delay: Delay,
}

/// Simulated environment for one run.
#[derive(Clone, Debug)]
pub struct Environment {
    instance: BanditInstance,
    horizon: u64,
    now: u64,
    drained_to: u64,
    pending: BinaryHeap<Reverse<Pending>>,
    streams: DelayStreams,
    log: Vec<PlayRecord>,
}

impl Environment {
    pub fn new(instance: BanditInstance, horizon: u64, seed: u64) -> Self {
        let streams = DelayStreams::new(seed, instance.num_arms());
        Self {
            instance,
            horizon,
            now: 1,
            drained_to: 0,
            pending: BinaryHeap::new(),
            streams,
            log: Vec::new(),
        }
    }

    pub fn instance(&self) -> &BanditInstance {
        &self.instance
    }

    pub fn num_arms(&self) -> usize {
        self.instance.num_arms()
    }

    pub fn max_delay(&self) -> Delay {
        self.instance.max_delay()
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Time of the next play.
    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn plays_made(&self) -> u64 {
        self.now - 1
    }

    pub fn remaining(&self) -> u64 {
        self.horizon - self.plays_made()
    }

    pub fn seed(&self) -> u64 {
        self.streams.seed()
    }

    /// Every play so far with its sampled delay. Only oracles and the
    /// regret accounting read this; agents see feedback through
    /// [`Environment::observed_before`].
    pub fn play_log(&self) -> &[PlayRecord] {
        &self.log
    }

    /// Number of plays still waiting in the queue.
    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Pull `arm` at the current time. Returns the play time.
    pub fn play(&mut self, arm: usize) -> Result<u64> {
        if self.plays_made() >= self.horizon {
            return Err(Error::RunEnded { horizon: self.horizon });
        }
        if arm >= self.num_arms() {
            return Err(Error::ArmOutOfRange { arm, arms: self.num_arms() });
        }
        let s = self.now;
        let delay = self.instance.sample(arm, self.streams.next_draw(arm));
        self.pending.push(Reverse(Pending { reveal: s + delay as u64, play_time: s, arm, delay }));
        self.log.push(PlayRecord { time: s, arm, delay });
        self.now += 1;
        Ok(s)
    }

    /// Drain every event with `s + d < t` not yet delivered, ordered by
    /// reveal time then play time.
    pub fn observed_before(&mut self, t: u64) -> Result<Vec<FeedbackEvent>> {
        let mut out = Vec::new();
        self.observed_before_into(t, &mut out)?;
        Ok(out)
    }

    /// Like [`Environment::observed_before`] but appends into `out`.
    pub fn observed_before_into(&mut self, t: u64, out: &mut Vec<FeedbackEvent>) -> Result<()> {
        if t < self.drained_to {
            return Err(Error::TimeWentBackwards { previous: self.drained_to, requested: t });
        }
        if t > self.now {
            return Err(Error::TimeAhead { now: self.now, requested: t });
        }
        self.drained_to = t;
        let max_delay = self.max_delay();
        while let Some(Reverse(top)) = self.pending.peek() {
            if top.reveal >= t {
                break;
            }
            let p = *top;
            self.pending.pop();
            out.push(FeedbackEvent { play_time: p.play_time, arm: p.arm, delay: p.delay, max_delay });
        }
        Ok(())
    }
}
