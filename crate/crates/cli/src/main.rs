use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use delaybandit::experiments::runner::default_output_dir;
use delaybandit::experiments::{run_experiment, verify_good_event, DistributionFamily, ExperimentConfig, GoodEventReport};
use delaybandit::rng::{generator_rng, mix_seed};
use delaybandit::{Algorithm, PayoffSense};

/// Bandits whose payoff is the normalized feedback delay.
///
/// All confidence radii use natural logarithms.
#[derive(Parser)]
#[command(name = "delaybandit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-seed experiment and write series.csv, summary.csv and metadata.json.
    Run(RunArgs),
    /// Monte-Carlo check of the missing-feedback and confidence bounds under round-robin play.
    VerifyLemmas(VerifyArgs),
    /// Generate one instance and write it as JSON.
    GenInstance(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "T")]
    horizon: Option<u64>,
    #[arg(long = "K")]
    arms: Option<usize>,
    #[arg(long = "D")]
    max_delay: Option<u32>,
    /// truncnormal, bernoulli, or lb:<kind>[:params]
    #[arg(long)]
    dist: Option<DistributionFamily>,
    #[arg(long)]
    sense: Option<PayoffSense>,
    /// Comma-separated subset of bdse, bhse, sepk, fullinfo_se
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<Algorithm>>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Carry statistics across doubling/halving segments.
    #[arg(long)]
    keep_history: bool,
    /// Use the seed-0 instance for every seed.
    #[arg(long)]
    fixed_instance: bool,
    /// Write every n-th step of each regret series.
    #[arg(long)]
    series_every: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "T", default_value_t = 5000)]
    horizon: u64,
    /// Round-robin width; also the number of arms per instance.
    #[arg(long = "R", default_value_t = 5)]
    width: usize,
    /// Number of random instances, one run each.
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long = "D", default_value_t = 200)]
    max_delay: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the aggregated report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "truncnormal")]
    dist: DistributionFamily,
    #[arg(long = "K", default_value_t = 30)]
    arms: usize,
    #[arg(long = "D", default_value_t = 5000)]
    max_delay: u32,
    #[arg(long)]
    sense: Option<PayoffSense>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::VerifyLemmas(args) => verify(args),
        Command::GenInstance(args) => gen_instance(args),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = args.arms {
        cfg.arms = v;
    }
    if let Some(v) = args.max_delay {
        cfg.max_delay = v;
    }
    if let Some(v) = args.dist {
        cfg.distribution = v;
    }
    if let Some(v) = args.sense {
        cfg.sense = Some(v);
    }
    if let Some(v) = args.algos {
        cfg.algorithms = v;
    }
    if let Some(v) = args.seeds {
        cfg.seeds = v;
    }
    if let Some(v) = args.base_seed {
        cfg.base_seed = v;
    }
    if let Some(v) = args.series_every {
        cfg.series_every = v;
    }
    cfg.keep_history |= args.keep_history;
    cfg.fixed_instance |= args.fixed_instance;
    if let Some(v) = args.out {
        cfg.output = Some(v);
    }
    if cfg.output.is_none() {
        cfg.output = Some(default_output_dir(&cfg));
    }

    let result = run_experiment(&cfg)?;
    for algo in &cfg.algorithms {
        let r = result.terminal_regrets(*algo);
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        println!("{:<12} terminal regret mean {mean:.1}  min {lo:.1}  max {hi:.1}", algo.name());
    }
    println!("wrote {}", cfg.output.as_ref().expect("set above").display());
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<()> {
    if args.width < 2 {
        bail!("--R must be at least 2");
    }
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let mut total = GoodEventReport::default();
    for trial in 0..args.trials as u64 {
        let (dist, sense) = match trial % 4 {
            0 => (DistributionFamily::TruncNormal, PayoffSense::Cost),
            1 => (DistributionFamily::TruncNormal, PayoffSense::Reward),
            2 => (DistributionFamily::Bernoulli, PayoffSense::Cost),
            _ => (DistributionFamily::Bernoulli, PayoffSense::Reward),
        };
        let inst = dist.generate(args.width, args.max_delay, sense, &mut generator_rng(mix_seed(args.seed, 2 * trial)))?;
        total.merge(&verify_good_event(&inst, args.horizon, 1, mix_seed(args.seed, 2 * trial + 1))?);
    }
    let rows = [
        ("missing upper", total.missing.upper),
        ("missing lower", total.missing.lower),
        ("empirical mean", total.empirical),
        ("estimator order", total.estimator_order),
        ("cost lcb", total.cost_lcb),
        ("cost ucb", total.cost_ucb),
        ("reward lcb", total.reward_lcb),
        ("reward ucb", total.reward_ucb),
        ("sepk lcb", total.sepk_lcb),
        ("sepk ucb", total.sepk_ucb),
    ];
    for (name, tally) in rows {
        println!("{name:<16} {:>10} / {:<10} violation rate {:.3e}", tally.violations, tally.checks, tally.rate());
    }
    if let Some(path) = args.out {
        std::fs::write(&path, serde_json::to_string_pretty(&total)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn gen_instance(args: GenArgs) -> Result<()> {
    let sense = match (args.dist.forced_sense(args.arms, args.max_delay), args.sense) {
        (Some(forced), Some(asked)) if forced != asked => bail!("{} only produces {forced} instances", args.dist),
        (Some(forced), _) => forced,
        (None, asked) => asked.unwrap_or(PayoffSense::Cost),
    };
    let inst = args.dist.generate(args.arms, args.max_delay, sense, &mut generator_rng(args.seed))?;
    let doc = serde_json::json!({
        "dist": args.dist.to_string(),
        "seed": args.seed,
        "instance": inst,
        "profile": inst.profile()?,
    });
    std::fs::write(&args.out, serde_json::to_string_pretty(&doc)?)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {}", args.out.display());
    Ok(())
}
