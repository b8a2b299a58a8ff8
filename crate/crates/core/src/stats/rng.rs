//! Reproducible random streams.
//!
//! Every stream is a xoshiro256++ generator. Its 64-bit seed is produced by
//! the SplitMix64 output function applied to `master_seed + γ·(index + 1)`,
//! where `γ = 0x9E3779B97F4A7C15`. That is the `index + 1`-th output of a
//! SplitMix64 sequence started at `master_seed`, so distinct indices under one
//! master seed always give distinct stream seeds. The 64-bit seed is then
//! expanded to the 256-bit xoshiro state with SplitMix64, as done by
//! `rand_xoshiro`. Both algorithms are fixed-width integer arithmetic and give
//! identical streams on every platform.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

/// The generator used by every simulation in this crate.
pub type SimRng = Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (Steele, Lea & Flood 2014).
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Seed of stream `stream_index`.
    pub fn derive_stream_seed(&self, stream_index: u64) -> u64 {
        derive_stream_seed(*self, stream_index)
    }

    pub fn stream(&self, stream_index: u64) -> SimRng {
        SimRng::seed_from_u64(self.derive_stream_seed(stream_index))
    }

    /// A child spec whose streams are disjoint in practice from this one's.
    pub fn child(&self, label: u64) -> RngSpec {
        RngSpec::new(splitmix64_mix(self.derive_stream_seed(label) ^ 0xA5A5_A5A5_5A5A_5A5A))
    }
}

pub fn derive_stream_seed(spec: RngSpec, stream_index: u64) -> u64 {
    let z = spec
        .master_seed
        .wrapping_add(GOLDEN_GAMMA.wrapping_mul(stream_index.wrapping_add(1)));
    splitmix64_mix(z)
}
