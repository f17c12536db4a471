//! Delay distributions and bandit instances.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Integer delay in `{0, ..., D}`.
pub type Delay = u32;

const PMF_TOLERANCE: f64 = 1e-12;

/// Whether the normalized delay is a cost to minimize or a reward to maximize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffSense {
    Cost,
    Reward,
}

impl std::str::FromStr for PayoffSense {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cost" => Ok(PayoffSense::Cost),
            "reward" => Ok(PayoffSense::Reward),
            other => Err(Error::config(format!("unknown payoff sense `{other}`"))),
        }
    }
}

impl std::fmt::Display for PayoffSense {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PayoffSense::Cost => "cost",
            PayoffSense::Reward => "reward",
        })
    }
}

/// Delay distribution of a single arm, supported on `{0, ..., D}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DelaySpec {
    Deterministic { value: Delay },
    /// `low` with probability `p`, `high` otherwise.
    TwoPoint { p: f64, low: Delay, high: Delay },
    /// Normal(mean_raw, std_raw) conditioned on `[0, D]`, rounded half-up.
    DiscretizedTruncNormal { mean_raw: f64, std_raw: f64 },
    /// Explicit pmf over `0..=D`.
    Tabular { pmf: Vec<f64> },
}

impl DelaySpec {
    pub fn validate(&self, max_delay: Delay) -> Result<()> {
        match *self {
            DelaySpec::Deterministic { value } => {
                if value > max_delay {
                    return Err(Error::config(format!("deterministic delay {value} exceeds D={max_delay}")));
                }
            }
            DelaySpec::TwoPoint { p, low, high } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::config(format!("two-point probability {p} outside [0,1]")));
                }
                if low >= high || high > max_delay {
                    return Err(Error::config(format!(
                        "two-point support needs 0 <= low < high <= D, got low={low} high={high} D={max_delay}"
                    )));
                }
            }
            DelaySpec::DiscretizedTruncNormal { mean_raw, std_raw } => {
                if !mean_raw.is_finite() || !std_raw.is_finite() || std_raw <= 0.0 {
                    return Err(Error::config(format!(
                        "truncated normal needs finite mean and positive std, got ({mean_raw}, {std_raw})"
                    )));
                }
                let z = normal_mass(-mean_raw / std_raw, (max_delay as f64 - mean_raw) / std_raw);
                if z < PMF_TOLERANCE {
                    return Err(Error::config(format!(
                        "truncated normal ({mean_raw}, {std_raw}) has negligible mass on [0, {max_delay}]"
                    )));
                }
            }
            DelaySpec::Tabular { ref pmf } => {
                if pmf.len() != max_delay as usize + 1 {
                    return Err(Error::config(format!(
                        "tabular pmf has {} entries, expected D+1={}",
                        pmf.len(),
                        max_delay as usize + 1
                    )));
                }
                if pmf.iter().any(|&q| !(q >= 0.0) || !q.is_finite()) {
                    return Err(Error::config("tabular pmf has a negative or non-finite entry"));
                }
                let total: f64 = pmf.iter().sum();
                if (total - 1.0).abs() > PMF_TOLERANCE {
                    return Err(Error::config(format!("tabular pmf sums to {total}, not 1")));
                }
            }
        }
        Ok(())
    }

    /// Probability mass over `0..=D`. Exact for every variant (no sampling).
    pub fn pmf(&self, max_delay: Delay) -> Vec<f64> {
        let n = max_delay as usize + 1;
        match *self {
            DelaySpec::Deterministic { value } => {
                let mut pmf = vec![0.0; n];
                pmf[value as usize] = 1.0;
                pmf
            }
            DelaySpec::TwoPoint { p, low, high } => {
                let mut pmf = vec![0.0; n];
                pmf[low as usize] += p;
                pmf[high as usize] += 1.0 - p;
                pmf
            }
            DelaySpec::DiscretizedTruncNormal { mean_raw, std_raw } => {
                trunc_normal_pmf(mean_raw, std_raw, max_delay)
            }
            DelaySpec::Tabular { ref pmf } => pmf.clone(),
        }
    }

    /// Expected delay (not normalized).
    pub fn expected_delay(&self, max_delay: Delay) -> f64 {
        match *self {
            DelaySpec::Deterministic { value } => value as f64,
            DelaySpec::TwoPoint { p, low, high } => p * low as f64 + (1.0 - p) * high as f64,
            _ => self
                .pmf(max_delay)
                .iter()
                .enumerate()
                .map(|(d, q)| d as f64 * q)
                .sum(),
        }
    }
}

/// Exact expected normalized payoff `E[X/D]`.
pub fn true_mean(spec: &DelaySpec, max_delay: Delay) -> f64 {
    let d = max_delay as f64;
    match *spec {
        // normalize each support point first so that TwoPoint(p, 0, D) has mean exactly 1 - p
        DelaySpec::TwoPoint { p, low, high } => p * (low as f64 / d) + (1.0 - p) * (high as f64 / d),
        _ => spec.expected_delay(max_delay) / d,
    }
}

/// `P(a <= Z < b)` for a standard normal, computed on the tail that keeps precision.
fn normal_mass(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a >= 0.0 {
        0.5 * (erfc(a / std::f64::consts::SQRT_2) - erfc(b / std::f64::consts::SQRT_2))
    } else if b <= 0.0 {
        0.5 * (erfc(-b / std::f64::consts::SQRT_2) - erfc(-a / std::f64::consts::SQRT_2))
    } else {
        1.0 - 0.5 * erfc(-a / std::f64::consts::SQRT_2) - 0.5 * erfc(b / std::f64::consts::SQRT_2)
    }
}

fn trunc_normal_pmf(mean: f64, std: f64, max_delay: Delay) -> Vec<f64> {
    let d = max_delay as f64;
    let z = |x: f64| (x - mean) / std;
    let total = normal_mass(z(0.0), z(d));
    (0..=max_delay)
        .map(|k| {
            let k = k as f64;
            let lo = (k - 0.5).max(0.0);
            let hi = (k + 0.5).min(d);
            normal_mass(z(lo), z(hi)) / total
        })
        .collect()
}

/// A validated arm: its spec plus whatever the sampler needs precomputed.
#[derive(Clone, Debug)]
pub(crate) enum ArmSampler {
    Deterministic(Delay),
    TwoPoint { p: f64, low: Delay, high: Delay },
    TruncNormal { normal: Normal<f64>, max: f64 },
    Tabular { cdf: Vec<f64> },
}

impl ArmSampler {
    fn compile(spec: &DelaySpec, max_delay: Delay) -> Result<Self> {
        spec.validate(max_delay)?;
        Ok(match *spec {
            DelaySpec::Deterministic { value } => ArmSampler::Deterministic(value),
            DelaySpec::TwoPoint { p, low, high } => ArmSampler::TwoPoint { p, low, high },
            DelaySpec::DiscretizedTruncNormal { mean_raw, std_raw } => ArmSampler::TruncNormal {
                normal: Normal::new(mean_raw, std_raw).map_err(|e| Error::config(e.to_string()))?,
                max: max_delay as f64,
            },
            DelaySpec::Tabular { ref pmf } => {
                let mut acc = 0.0;
                let mut cdf: Vec<f64> = pmf
                    .iter()
                    .map(|q| {
                        acc += q;
                        acc
                    })
                    .collect();
                *cdf.last_mut().expect("D >= 1") = 1.0;
                ArmSampler::Tabular { cdf }
            }
        })
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Delay {
        match self {
            ArmSampler::Deterministic(v) => *v,
            ArmSampler::TwoPoint { p, low, high } => {
                if rng.random::<f64>() < *p {
                    *low
                } else {
                    *high
                }
            }
            ArmSampler::TruncNormal { normal, max } => loop {
                let x = normal.sample(rng);
                if (0.0..=*max).contains(&x) {
                    break (x + 0.5).floor() as Delay;
                }
            },
            ArmSampler::Tabular { cdf } => {
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&c| c <= u);
                k.min(cdf.len() - 1) as Delay
            }
        }
    }
}

/// Draw one delay from `spec`. Validates the spec first; hot loops should
/// go through [`BanditInstance`], which compiles each arm once.
pub fn sample_delay<R: Rng + ?Sized>(spec: &DelaySpec, max_delay: Delay, rng: &mut R) -> Result<Delay> {
    Ok(ArmSampler::compile(spec, max_delay)?.sample(rng))
}

#[derive(Clone, Debug)]
pub(crate) struct Arm {
    pub(crate) spec: DelaySpec,
    pub(crate) sampler: ArmSampler,
    pub(crate) mean: f64,
}

/// On-disk form of an instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "D")]
    pub max_delay: Delay,
    pub sense: PayoffSense,
    pub arms: Vec<DelaySpec>,
}

/// K arms with delay distributions over `{0..D}` and a payoff sense.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct BanditInstance {
    max_delay: Delay,
    sense: PayoffSense,
    arms: Vec<Arm>,
}

impl PartialEq for BanditInstance {
    fn eq(&self, other: &Self) -> bool {
        self.max_delay == other.max_delay
            && self.sense == other.sense
            && self.arms.len() == other.arms.len()
            && self.arms.iter().zip(&other.arms).all(|(a, b)| a.spec == b.spec)
    }
}

impl TryFrom<InstanceFile> for BanditInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.k != file.arms.len() {
            return Err(Error::config(format!("K={} but {} arms listed", file.k, file.arms.len())));
        }
        BanditInstance::new(file.max_delay, file.sense, file.arms)
    }
}

impl From<BanditInstance> for InstanceFile {
    fn from(inst: BanditInstance) -> Self {
        InstanceFile {
            k: inst.arms.len(),
            max_delay: inst.max_delay,
            sense: inst.sense,
            arms: inst.arms.into_iter().map(|a| a.spec).collect(),
        }
    }
}

impl BanditInstance {
    /// Validates every arm. Single-arm instances are accepted (they have a
    /// trivially unique optimum and zero regret); experiments use `K >= 2`.
    pub fn new(max_delay: Delay, sense: PayoffSense, specs: Vec<DelaySpec>) -> Result<Self> {
        if max_delay < 1 {
            return Err(Error::config("maximum delay D must be at least 1"));
        }
        if specs.is_empty() {
            return Err(Error::config("instance needs at least one arm"));
        }
        let arms = specs
            .into_iter()
            .map(|spec| {
                let sampler = ArmSampler::compile(&spec, max_delay)?;
                let mean = true_mean(&spec, max_delay);
                Ok(Arm { spec, sampler, mean })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { max_delay, sense, arms })
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn max_delay(&self) -> Delay {
        self.max_delay
    }

    pub fn sense(&self) -> PayoffSense {
        self.sense
    }

    pub fn spec(&self, arm: usize) -> &DelaySpec {
        &self.arms[arm].spec
    }

    pub fn specs(&self) -> impl Iterator<Item = &DelaySpec> {
        self.arms.iter().map(|a| &a.spec)
    }

    /// Exact normalized means `mu(i)`.
    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.mean).collect()
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Delay {
        self.arms[arm].sampler.sample(rng)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn profile(&self) -> Result<InstanceProfile> {
        instance_profile(self)
    }
}

/// Quantities derived from the true means of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceProfile {
    pub sense: PayoffSense,
    pub max_delay: Delay,
    pub means: Vec<f64>,
    pub gaps: Vec<f64>,
    pub optimal_mean: f64,
    pub best_arm: usize,
    pub max_gap: f64,
    /// `d*`: smallest expected delay.
    pub min_expected_delay: f64,
    /// `d̄`: second element of the expected delays sorted descending.
    pub second_max_expected_delay: f64,
}

impl InstanceProfile {
    pub fn expected_delay(&self, arm: usize) -> f64 {
        self.means[arm] * self.max_delay as f64
    }
}

pub fn instance_profile(instance: &BanditInstance) -> Result<InstanceProfile> {
    let means = instance.means();
    let optimal_mean = match instance.sense {
        PayoffSense::Cost => means.iter().copied().fold(f64::INFINITY, f64::min),
        PayoffSense::Reward => means.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    let optimal: Vec<usize> = (0..means.len()).filter(|&i| means[i] == optimal_mean).collect();
    if optimal.len() != 1 {
        return Err(Error::NonUniqueOptimum { arms: optimal });
    }
    let gaps: Vec<f64> = means.iter().map(|m| (m - optimal_mean).abs()).collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let d = instance.max_delay as f64;
    let mut delays: Vec<f64> = means.iter().map(|m| m * d).collect();
    delays.sort_by(|a, b| b.total_cmp(a));
    let min_expected_delay = *delays.last().expect("non-empty");
    let second_max_expected_delay = delays.get(1).copied().unwrap_or(delays[0]);
    Ok(InstanceProfile {
        sense: instance.sense,
        max_delay: instance.max_delay,
        means,
        gaps,
        optimal_mean,
        best_arm: optimal[0],
        max_gap,
        min_expected_delay,
        second_max_expected_delay,
    })
}
