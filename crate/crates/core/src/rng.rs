//! Counter-based random streams.
//!
//! Every draw of a run is addressed by `(run seed, iteration, phase)`: the run
//! seed is the ChaCha key, the phase selects the ChaCha stream and the
//! iteration selects a disjoint window of the block counter. A step therefore
//! sees the same noise no matter how runs are scheduled across threads.
//!
//! Run seeds are derived from `(base_seed, run_id)` with [`split_seed`], a
//! SplitMix64 finalizer over `base_seed + (run_id + 1) * 0x9E3779B97F4A7C15`
//! (wrapping arithmetic). Other implementations can reproduce the partition of
//! runs even if they cannot reproduce the ChaCha draws themselves.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved for one `(iteration, phase)` slot.
const SLOT_WORDS_LOG2: u32 = 32;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_id` within an experiment seeded with `base_seed`.
pub fn split_seed(base_seed: u64, run_id: u64) -> u64 {
    splitmix64(base_seed.wrapping_add(run_id.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Which oracle call within a step a draw belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Exploration (leading-state) call, or the single call of one-call methods.
    Explore,
    /// Update call at the leading state.
    Update,
    /// Auxiliary draws (second independent sample of SHGD, Monte-Carlo blocks).
    Extra,
}

impl Phase {
    fn stream_id(self) -> u64 {
        match self {
            Phase::Explore => 0,
            Phase::Update => 1,
            Phase::Extra => 2,
        }
    }
}

/// Source of the per-step streams of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunStreams {
    seed: u64,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Streams of run `run_id` of an experiment.
    pub fn for_run(base_seed: u64, run_id: u64) -> Self {
        Self::new(split_seed(base_seed, run_id))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator positioned at the start of the `(iteration, phase)` slot.
    pub fn stream(&self, iteration: u64, phase: Phase) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(phase.stream_id());
        rng.set_word_pos(u128::from(iteration) << SLOT_WORDS_LOG2);
        rng
    }
}
