//! Stochastic bandits whose payoff is the delay of their own feedback.
//!
//! Pulling an arm draws a delay `d <= D`; the payoff `d / D` is only
//! revealed `d` steps later, so long (costly, or rewarding) delays are
//! exactly the ones observed last. The crate provides:
//!
//! * [`env`]: instances, delay distributions and the delayed-feedback
//!   environment,
//! * [`stats`] and [`bounds`]: per-arm estimators and confidence bounds,
//! * [`algorithms`]: elimination agents for the cost and reward settings,
//! * [`experiments`]: generators, the multi-seed runner and verifiers.
//!
//! Statistics, bounds and agents are generic over [`Scalar`] (`f32` or
//! `f64`); the aliases below fix `f64`, with `32`-suffixed variants.

pub mod algorithms;
pub mod bounds;
pub mod env;
pub mod error;
pub mod experiments;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use algorithms::{
    bdse_run, bhse_run, cse_run, fullinfo_se_run, rse_run, sepk_run, AgentOptions, AgentRun, Algorithm, Status,
    ThresholdedConfig,
};
pub use bounds::{BoundConstants, BoundContext};
pub use env::{BanditInstance, Delay, DelaySpec, Environment, FeedbackEvent, InstanceProfile, PayoffSense};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use stats::{ArmSnapshot, ArmTracker};

pub type Snapshot = ArmSnapshot<f64>;
pub type Tracker = ArmTracker<f64>;
pub type BoundCtx = BoundContext<f64>;
pub type Run = AgentRun<f64>;
pub type Thresholded = ThresholdedConfig<f64>;

pub type Snapshot32 = ArmSnapshot<f32>;
pub type Tracker32 = ArmTracker<f32>;
pub type BoundCtx32 = BoundContext<f32>;
pub type Run32 = AgentRun<f32>;
pub type Thresholded32 = ThresholdedConfig<f32>;
