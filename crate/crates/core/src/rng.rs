//! Counter-addressed random streams.
//!
//! Every arm owns an independent ChaCha8 stream selected by `(seed, arm)`.
//! The k-th delay drawn for an arm is therefore a pure function of
//! `(seed, arm, k)`, whatever the interleaving of plays across arms. Two
//! agents run against the same seed see identical delays on their k-th pull
//! of a given arm, which is what makes paired comparisons low-variance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id reserved for instance generation, disjoint from any arm index.
const GENERATOR_STREAM: u64 = u64::MAX;

/// Per-arm delay streams for one environment.
#[derive(Clone, Debug)]
pub struct DelayStreams {
    seed: u64,
    arms: Vec<ChaCha8Rng>,
    draws: Vec<u64>,
}

impl DelayStreams {
    pub fn new(seed: u64, arms: usize) -> Self {
        let arms_rng = (0..arms).map(|arm| arm_stream(seed, arm)).collect();
        Self { seed, arms: arms_rng, draws: vec![0; arms] }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for `arm`, advancing its draw counter.
    pub fn next_draw(&mut self, arm: usize) -> &mut ChaCha8Rng {
        self.draws[arm] += 1;
        &mut self.arms[arm]
    }

    /// Number of delays drawn so far from `arm`'s stream.
    pub fn draws(&self, arm: usize) -> u64 {
        self.draws[arm]
    }
}

pub fn arm_stream(seed: u64, arm: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(arm as u64);
    rng
}

/// Generator stream for instance sampling at `seed`.
pub fn generator_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(GENERATOR_STREAM);
    rng
}

/// SplitMix64 finalizer, used to derive per-run seeds from a base seed.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
