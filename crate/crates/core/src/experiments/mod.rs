//! Instance generators, the multi-seed runner, and Monte-Carlo verifiers.

pub mod config;
pub mod generators;
pub mod regret;
pub mod runner;
pub mod verify;

pub use config::ExperimentConfig;
pub use generators::{
    gen_bernoulli_instance, gen_lowerbound_instance, gen_truncnormal_instance, DistributionFamily, LowerBoundKind,
    LowerBoundTemplate, Variant,
};
pub use regret::{pseudo_regret, summarize, RegretSeries, SummaryRow};
pub use runner::{run_cell, run_experiment, ExperimentResult, InstanceRecord, RunOutcome};
pub use verify::{verify_good_event, verify_missing_bounds, GoodEventReport, MissingBoundReport};
