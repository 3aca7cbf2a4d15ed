//! Seeded random streams.
//!
//! Every sampler takes an explicit `&mut R: Rng`. Independent trials derive
//! their generator from `(base_seed, index)` so that results do not depend on
//! scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate and the CLI.
pub type SimRng = ChaCha8Rng;

/// Mixes a base seed and a stream index into a 64-bit seed (SplitMix64
/// finalizer applied twice).
pub fn stream_seed(base_seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(base_seed) ^ index)
}

/// Generator for stream `index` of `base_seed`.
pub fn stream_rng(base_seed: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(stream_seed(base_seed, index))
}

/// Generator for a single explicit seed.
pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
