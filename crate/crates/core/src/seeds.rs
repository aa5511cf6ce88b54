//! Seed derivation.
//!
//! Every random stream in an experiment is derived from one base seed and a
//! named purpose plus an index. The derivation is a SplitMix64 finalizer over
//! the base seed, an FNV-1a hash of the purpose label, and the index, so the
//! mapping is stable across platforms and independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Purpose label for the graph generator seed.
pub const GRAPH_STREAM: &str = "graph";
/// Purpose label for per-trajectory noise seeds (index = sweep point / run index).
pub const TRAJECTORY_STREAM: &str = "trajectory";
/// Purpose label for the mean-field initial perturbation.
pub const PERTURBATION_STREAM: &str = "perturbation";

/// The generator used everywhere in the crate.
pub type SimRng = ChaCha12Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derives the seed of stream `purpose[index]` from `base`.
pub fn derive_seed(base: u64, purpose: &str, index: u64) -> u64 {
    splitmix64(splitmix64(base ^ fnv1a(purpose)).wrapping_add(index))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
