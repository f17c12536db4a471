//! Multi-seed runner and its CSV/JSON outputs.
//!
//! Seed `k` of an experiment draws its instance from `mix_seed(base, 2k)` and
//! its delay streams from `mix_seed(base, 2k + 1)`. Every algorithm at seed
//! `k` replays the same instance and the same per-arm delay streams.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{AgentOptions, AgentRun, Algorithm, Status};
use crate::env::{BanditInstance, Environment, InstanceProfile};
use crate::error::{Error, Result};
use crate::rng::{generator_rng, mix_seed};

use super::config::ExperimentConfig;
use super::generators::TRUNCNORMAL_MEAN_SCALE;
use super::regret::{pseudo_regret, summarize, RegretSeries, SummaryRow};

pub const SERIES_FILE: &str = "series.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const METADATA_FILE: &str = "metadata.json";

/// Instance used at one seed, with the seeds that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance_id: String,
    pub seed_index: usize,
    pub instance_seed: u64,
    pub env_seed: u64,
    pub instance: BanditInstance,
    pub profile: InstanceProfile,
}

/// Trace-level facts about one (seed, algorithm) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub algo: String,
    pub seed_index: usize,
    pub instance_id: String,
    pub status: Status,
    pub steps_used: u64,
    pub segments: usize,
    pub eliminations: usize,
    pub final_active: Vec<usize>,
    pub best_arm_eliminated: bool,
    pub terminal_regret: f64,
}

pub struct CellOutput {
    pub run: AgentRun<f64>,
    pub series: RegretSeries,
}

/// Run `algo` on a fresh environment and compute its regret series.
pub fn run_cell(
    record: &InstanceRecord,
    algo: Algorithm,
    horizon: u64,
    opts: &AgentOptions,
) -> Result<CellOutput> {
    let mut env = Environment::new(record.instance.clone(), horizon, record.env_seed);
    let run = algo.run::<f64>(&mut env, opts)?;
    let values = pseudo_regret(&run, &record.profile)?;
    let series = RegretSeries {
        run_id: run_id(algo.name(), &record.instance_id, record.env_seed),
        algo: algo.name().to_string(),
        instance_id: record.instance_id.clone(),
        seed: record.env_seed,
        values,
    };
    Ok(CellOutput { run, series })
}

fn run_id(algo: &str, instance_id: &str, seed: u64) -> String {
    format!("{algo}:{instance_id}:{seed}")
}

/// Instances for every seed of `cfg`, in seed order.
pub fn build_instances(cfg: &ExperimentConfig) -> Result<Vec<InstanceRecord>> {
    let sense = cfg.effective_sense()?;
    let mut shared: Option<(u64, BanditInstance)> = None;
    (0..cfg.seeds)
        .map(|k| {
            let env_seed = mix_seed(cfg.base_seed, 2 * k as u64 + 1);
            let (instance_seed, instance) = match (&shared, cfg.fixed_instance) {
                (Some((s, inst)), true) => (*s, inst.clone()),
                _ => {
                    let s = mix_seed(cfg.base_seed, 2 * k as u64);
                    let inst = cfg.distribution.generate(cfg.arms, cfg.max_delay, sense, &mut generator_rng(s))?;
                    if cfg.fixed_instance {
                        shared = Some((s, inst.clone()));
                    }
                    (s, inst)
                }
            };
            let profile = instance.profile()?;
            let instance_id = if cfg.fixed_instance { "inst-0".to_string() } else { format!("inst-{k}") };
            Ok(InstanceRecord { instance_id, seed_index: k, instance_seed, env_seed, instance, profile })
        })
        .collect()
}

/// Outputs of [`run_experiment`].
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub instances: Vec<InstanceRecord>,
    /// Ordered by seed, then by the configured algorithm order.
    pub series: Vec<RegretSeries>,
    pub outcomes: Vec<RunOutcome>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    /// Terminal regret per seed for `algo`.
    pub fn terminal_regrets(&self, algo: Algorithm) -> Vec<f64> {
        self.series.iter().filter(|s| s.algo == algo.name()).map(|s| s.terminal()).collect()
    }

    pub fn outcomes_for(&self, algo: Algorithm) -> impl Iterator<Item = &RunOutcome> {
        self.outcomes.iter().filter(move |o| o.algo == algo.name())
    }

    /// Write series, summary and metadata into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_series(fs::File::create(dir.join(SERIES_FILE))?, &self.series, self.config.series_every)?;
        write_summary(fs::File::create(dir.join(SUMMARY_FILE))?, &self.summary)?;
        let meta = Metadata {
            config: &self.config,
            truncnormal_mean_scale: TRUNCNORMAL_MEAN_SCALE,
            instances: &self.instances,
            outcomes: &self.outcomes,
        };
        fs::write(dir.join(METADATA_FILE), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    config: &'a ExperimentConfig,
    /// Raw truncated-normal means are exponential with mean `scale * D`.
    truncnormal_mean_scale: f64,
    instances: &'a [InstanceRecord],
    outcomes: &'a [RunOutcome],
}

/// Run every (seed, algorithm) cell in parallel and write outputs if
/// `cfg.output` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let instances = build_instances(cfg)?;
    let opts = cfg.agent_options();
    let cells: Vec<(usize, Algorithm)> =
        (0..instances.len()).flat_map(|k| cfg.algorithms.iter().map(move |&a| (k, a))).collect();
    let results: Vec<(RegretSeries, RunOutcome)> = cells
        .par_iter()
        .map(|&(k, algo)| {
            let record = &instances[k];
            let CellOutput { run, series } = run_cell(record, algo, cfg.horizon, &opts)?;
            let outcome = RunOutcome {
                algo: algo.name().to_string(),
                seed_index: k,
                instance_id: record.instance_id.clone(),
                status: run.status,
                steps_used: run.steps_used,
                segments: run.segment_count(),
                eliminations: run.eliminations.len(),
                final_active: run.final_active().to_vec(),
                best_arm_eliminated: run.was_eliminated(record.profile.best_arm),
                terminal_regret: series.terminal(),
            };
            Ok((series, outcome))
        })
        .collect::<Result<_>>()?;
    let (series, outcomes): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let mut summary = Vec::new();
    for algo in &cfg.algorithms {
        let group: Vec<&RegretSeries> = series.iter().filter(|s| s.algo == algo.name()).collect();
        summary.extend(summarize(algo.name(), &group));
    }
    let result = ExperimentResult { config: cfg.clone(), instances, series, outcomes, summary };
    if let Some(dir) = &cfg.output {
        result.write(dir)?;
    }
    Ok(result)
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesRow<'a> {
    algo: &'a str,
    instance_id: &'a str,
    seed: u64,
    t: u64,
    cum_regret: f64,
}

/// Write series rows `algo,instance_id,seed,t,cum_regret`, keeping every
/// `every`-th step and the final one.
pub fn write_series<W: Write>(out: W, series: &[RegretSeries], every: u64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if series.is_empty() {
        w.write_record(["algo", "instance_id", "seed", "t", "cum_regret"])?;
    }
    for s in series {
        let len = s.values.len() as u64;
        for (k, &v) in s.values.iter().enumerate() {
            let t = k as u64 + 1;
            if t % every != 0 && t != len {
                continue;
            }
            w.serialize(SeriesRow { algo: &s.algo, instance_id: &s.instance_id, seed: s.seed, t, cum_regret: v })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct OwnedSeriesRow {
    algo: String,
    instance_id: String,
    seed: u64,
    t: u64,
    cum_regret: f64,
}

/// Parse a series CSV written with stride 1.
pub fn read_series<R: Read>(input: R) -> Result<Vec<RegretSeries>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut order: Vec<(String, String, u64)> = Vec::new();
    let mut by_key: BTreeMap<(String, String, u64), Vec<f64>> = BTreeMap::new();
    for row in rdr.deserialize::<OwnedSeriesRow>() {
        let row = row?;
        let key = (row.algo, row.instance_id, row.seed);
        let values = by_key.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            Vec::new()
        });
        if row.t != values.len() as u64 + 1 {
            return Err(Error::config(format!(
                "series {}:{}:{} jumps to t={} after {} rows",
                key.0,
                key.1,
                key.2,
                row.t,
                values.len()
            )));
        }
        values.push(row.cum_regret);
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let values = by_key.remove(&key).expect("recorded key");
            let (algo, instance_id, seed) = key;
            RegretSeries { run_id: run_id(&algo, &instance_id, seed), algo, instance_id, seed, values }
        })
        .collect())
}

/// Write summary rows `algo,t,mean_regret,std_regret`.
pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["algo", "t", "mean_regret", "std_regret"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary<R: Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Default output directory name for a config without `out`.
pub fn default_output_dir(cfg: &ExperimentConfig) -> PathBuf {
    PathBuf::from(format!(
        "results/{}_T{}_K{}_D{}_s{}",
        cfg.distribution.to_string().replace(':', "-"),
        cfg.horizon,
        cfg.arms,
        cfg.max_delay,
        cfg.base_seed
    ))
}
