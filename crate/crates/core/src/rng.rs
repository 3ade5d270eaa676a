//! Reproducible random streams.
//!
//! Every stochastic component draws from a [`SimRng`] derived from the
//! experiment seed and a short path of stream tags (trial index, axis index,
//! purpose), so results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags used across the crate.
pub mod tag {
    pub const SCENARIO: u64 = 1;
    pub const PILOTS: u64 = 2;
    pub const CHANNELS: u64 = 3;
    pub const NOISE: u64 = 4;
    pub const INIT: u64 = 5;
    pub const SHUFFLE: u64 = 6;
    pub const DATASET: u64 = 7;
    pub const TRIAL: u64 = 8;
    pub const BEAMFORM: u64 = 9;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Hashes a path of stream tags into a 64-bit value.
pub fn hash_path(path: &[u64]) -> u64 {
    path.iter().fold(0x6A09_E667_F3BC_C908, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// Seed for the stream `seed ^ hash(path)`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    seed ^ hash_path(path)
}

pub fn stream(seed: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, path))
}

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
