//! Random and adversarial instance constructions.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::env::{BanditInstance, Delay, DelaySpec, PayoffSense};
use crate::error::{Error, Result};

/// Regeneration attempts before giving up on a unique optimum.
pub const MAX_GENERATION_ATTEMPTS: usize = 100;

/// Raw means are exponential with mean `D * TRUNCNORMAL_MEAN_SCALE`.
pub const TRUNCNORMAL_MEAN_SCALE: f64 = 0.25;

fn check_arms(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::config(format!("need at least 2 arms, got {k}")));
    }
    Ok(())
}

fn unique_or_retry<R: Rng + ?Sized>(
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> Result<BanditInstance>,
) -> Result<BanditInstance> {
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let inst = draw(rng)?;
        match inst.profile() {
            Ok(_) => return Ok(inst),
            Err(Error::NonUniqueOptimum { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationExhausted { attempts: MAX_GENERATION_ATTEMPTS })
}

/// Discretized truncated normal arms with exponentially distributed raw
/// means (scale `D/4`, clipped to `[0, D]`) and uniform std devs on `(0, D]`.
pub fn gen_truncnormal_instance<R: Rng + ?Sized>(
    k: usize,
    max_delay: Delay,
    rng: &mut R,
    sense: PayoffSense,
) -> Result<BanditInstance> {
    check_arms(k)?;
    let d = max_delay as f64;
    let exp = Exp::new(1.0 / (TRUNCNORMAL_MEAN_SCALE * d)).map_err(|e| Error::config(e.to_string()))?;
    unique_or_retry(rng, |rng| {
        let arms = (0..k)
            .map(|_| {
                let mean_raw = exp.sample(rng).min(d);
                let std_raw = d * (1.0 - rng.random::<f64>());
                DelaySpec::DiscretizedTruncNormal { mean_raw, std_raw }
            })
            .collect();
        BanditInstance::new(max_delay, sense, arms)
    })
}

/// Arms paying 0 with probability `p_i` and `D` otherwise, `p_i ~ U[0, 1]`.
pub fn gen_bernoulli_instance<R: Rng + ?Sized>(
    k: usize,
    max_delay: Delay,
    rng: &mut R,
    sense: PayoffSense,
) -> Result<BanditInstance> {
    check_arms(k)?;
    unique_or_retry(rng, |rng| {
        let arms = (0..k).map(|_| DelaySpec::TwoPoint { p: rng.random(), low: 0, high: max_delay }).collect();
        BanditInstance::new(max_delay, sense, arms)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    A,
    B,
}

/// Hard instances behind the lower bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LowerBoundKind {
    /// `{Det(d*), Det(D)}`, cost; needs `d* <= D/2`.
    CostTwoArm { d_star: Delay, max_delay: Delay },
    /// `{Det(D), Det(second), Det(0) x (K-2)}`, reward; needs `second <= D/2`.
    RewardConstellation { k: usize, max_delay: Delay, second: Delay },
    /// Two indistinguishable-until-D/4 cost instances with gap of order `mu`.
    DeltaThetaMu { mu: f64, max_delay: Delay, variant: Variant },
    /// Instances that trap conservative elimination for about `sqrt(D d*)` steps; needs `d* <= D/4`.
    ConservativePair { d_star: f64, max_delay: Delay, variant: Variant },
}

impl LowerBoundKind {
    pub fn sense(&self) -> PayoffSense {
        match self {
            LowerBoundKind::RewardConstellation { .. } => PayoffSense::Reward,
            _ => PayoffSense::Cost,
        }
    }

    pub fn max_delay(&self) -> Delay {
        match *self {
            LowerBoundKind::CostTwoArm { max_delay, .. }
            | LowerBoundKind::RewardConstellation { max_delay, .. }
            | LowerBoundKind::DeltaThetaMu { max_delay, .. }
            | LowerBoundKind::ConservativePair { max_delay, .. } => max_delay,
        }
    }

    /// Arms in canonical order (before the random permutation).
    pub fn canonical_arms(&self) -> Result<Vec<DelaySpec>> {
        let det = |value: Delay| DelaySpec::Deterministic { value };
        match *self {
            LowerBoundKind::CostTwoArm { d_star, max_delay } => {
                if 2 * d_star as u64 > max_delay as u64 {
                    return Err(Error::config(format!("cost two-arm needs d* <= D/2, got d*={d_star} D={max_delay}")));
                }
                Ok(vec![det(d_star), det(max_delay)])
            }
            LowerBoundKind::RewardConstellation { k, max_delay, second } => {
                if k < 2 {
                    return Err(Error::config("reward constellation needs K >= 2"));
                }
                if 2 * second as u64 > max_delay as u64 {
                    return Err(Error::config(format!(
                        "reward constellation needs second delay <= D/2, got {second} with D={max_delay}"
                    )));
                }
                let mut arms = vec![det(max_delay), det(second)];
                arms.extend((2..k).map(|_| det(0)));
                Ok(arms)
            }
            LowerBoundKind::DeltaThetaMu { mu, max_delay, variant } => {
                if !(mu > 0.0 && mu <= 1.0) {
                    return Err(Error::config(format!("mu must lie in (0, 1], got {mu}")));
                }
                let d = max_delay as f64;
                let half = (d * mu / 2.0).round() as Delay;
                let high = match variant {
                    Variant::A => (d / 4.0).round() as Delay,
                    Variant::B => max_delay,
                };
                if high == 0 || half == 0 {
                    return Err(Error::config(format!("D={max_delay} too small for mu={mu}")));
                }
                Ok(vec![DelaySpec::TwoPoint { p: 1.0 - mu, low: 0, high }, det(half)])
            }
            LowerBoundKind::ConservativePair { d_star, max_delay, variant } => {
                let d = max_delay as f64;
                if !(d_star > 0.0 && 4.0 * d_star <= d) {
                    return Err(Error::config(format!("conservative pair needs 0 < d* <= D/4, got d*={d_star} D={d}")));
                }
                let geo = (d * d_star).sqrt();
                let q = 2.0 * (d_star / d).sqrt();
                match variant {
                    Variant::A => {
                        let high = (geo / 2.0).round() as Delay;
                        if high == 0 {
                            return Err(Error::config("sqrt(D d*)/2 rounds to 0"));
                        }
                        Ok(vec![DelaySpec::TwoPoint { p: 1.0 - q, low: 0, high }, det(max_delay)])
                    }
                    Variant::B => Ok(vec![DelaySpec::TwoPoint { p: 1.0 - q, low: 0, high: max_delay }, det(geo.round() as Delay)]),
                }
            }
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "a",
            Variant::B => "b",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" | "1" => Ok(Variant::A),
            "b" | "B" | "2" => Ok(Variant::B),
            other => Err(Error::config(format!("unknown instance variant `{other}`"))),
        }
    }
}

/// Build a lower-bound instance, permuting arm identities with `rng`.
pub fn gen_lowerbound_instance<R: Rng + ?Sized>(kind: &LowerBoundKind, rng: &mut R) -> Result<BanditInstance> {
    let mut arms = kind.canonical_arms()?;
    arms.shuffle(rng);
    let inst = BanditInstance::new(kind.max_delay(), kind.sense(), arms)?;
    inst.profile()?;
    Ok(inst)
}

/// Instance family selected by the experiment runner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistributionFamily {
    TruncNormal,
    Bernoulli,
    /// Lower-bound construction. `K`, `D` and the sense come from the
    /// construction itself.
    LowerBound(LowerBoundTemplate),
}

/// Lower-bound family with `K`/`D` left to the experiment config.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LowerBoundTemplate {
    CostTwoArm { d_star: Delay },
    RewardConstellation { second: Option<Delay> },
    DeltaThetaMu { mu: f64, variant: Variant },
    ConservativePair { d_star: f64, variant: Variant },
}

impl LowerBoundTemplate {
    pub fn instantiate(&self, k: usize, max_delay: Delay) -> LowerBoundKind {
        match *self {
            LowerBoundTemplate::CostTwoArm { d_star } => LowerBoundKind::CostTwoArm { d_star, max_delay },
            LowerBoundTemplate::RewardConstellation { second } => {
                LowerBoundKind::RewardConstellation { k, max_delay, second: second.unwrap_or(max_delay / 2) }
            }
            LowerBoundTemplate::DeltaThetaMu { mu, variant } => LowerBoundKind::DeltaThetaMu { mu, max_delay, variant },
            LowerBoundTemplate::ConservativePair { d_star, variant } => {
                LowerBoundKind::ConservativePair { d_star, max_delay, variant }
            }
        }
    }
}

impl DistributionFamily {
    /// Sense forced by the family, if any.
    pub fn forced_sense(&self, k: usize, max_delay: Delay) -> Option<PayoffSense> {
        match self {
            DistributionFamily::LowerBound(t) => Some(t.instantiate(k, max_delay).sense()),
            _ => None,
        }
    }

    pub fn generate<R: Rng + ?Sized>(
        &self,
        k: usize,
        max_delay: Delay,
        sense: PayoffSense,
        rng: &mut R,
    ) -> Result<BanditInstance> {
        match self {
            DistributionFamily::TruncNormal => gen_truncnormal_instance(k, max_delay, rng, sense),
            DistributionFamily::Bernoulli => gen_bernoulli_instance(k, max_delay, rng, sense),
            DistributionFamily::LowerBound(t) => gen_lowerbound_instance(&t.instantiate(k, max_delay), rng),
        }
    }
}

impl fmt::Display for DistributionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionFamily::TruncNormal => f.write_str("truncnormal"),
            DistributionFamily::Bernoulli => f.write_str("bernoulli"),
            DistributionFamily::LowerBound(t) => match t {
                LowerBoundTemplate::CostTwoArm { d_star } => write!(f, "lb:cost_two_arm:{d_star}"),
                LowerBoundTemplate::RewardConstellation { second: None } => f.write_str("lb:reward_constellation"),
                LowerBoundTemplate::RewardConstellation { second: Some(s) } => {
                    write!(f, "lb:reward_constellation:{s}")
                }
                LowerBoundTemplate::DeltaThetaMu { mu, variant } => write!(f, "lb:delta_theta_mu:{mu}:{variant}"),
                LowerBoundTemplate::ConservativePair { d_star, variant } => {
                    write!(f, "lb:conservative_pair:{d_star}:{variant}")
                }
            },
        }
    }
}

impl FromStr for DistributionFamily {
    type Err = Error;

    /// `truncnormal`, `bernoulli`, or `lb:<kind>[:params]` with kinds
    /// `cost_two_arm:<d*>`, `reward_constellation[:<second>]`,
    /// `delta_theta_mu:<mu>:<a|b>`, `conservative_pair:<d*>:<a|b>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("cannot parse distribution `{s}`"));
        match s {
            "truncnormal" => return Ok(DistributionFamily::TruncNormal),
            "bernoulli" => return Ok(DistributionFamily::Bernoulli),
            _ => {}
        }
        let rest = s.strip_prefix("lb:").ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split(':').collect();
        let num = |i: usize| -> Result<f64> { parts.get(i).ok_or_else(bad)?.parse::<f64>().map_err(|_| bad()) };
        let int = |i: usize| -> Result<Delay> { parts.get(i).ok_or_else(bad)?.parse::<Delay>().map_err(|_| bad()) };
        let template = match (parts[0], parts.len()) {
            ("cost_two_arm", 2) => LowerBoundTemplate::CostTwoArm { d_star: int(1)? },
            ("reward_constellation", 1) => LowerBoundTemplate::RewardConstellation { second: None },
            ("reward_constellation", 2) => LowerBoundTemplate::RewardConstellation { second: Some(int(1)?) },
            ("delta_theta_mu", 3) => LowerBoundTemplate::DeltaThetaMu { mu: num(1)?, variant: parts[2].parse()? },
            ("conservative_pair", 3) => {
                LowerBoundTemplate::ConservativePair { d_star: num(1)?, variant: parts[2].parse()? }
            }
            _ => return Err(bad()),
        };
        Ok(DistributionFamily::LowerBound(template))
    }
}

impl Serialize for DistributionFamily {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DistributionFamily {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
