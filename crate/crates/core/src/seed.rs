//! Seed derivation.
//!
//! Every random stage draws from a ChaCha stream seeded by a 64-bit value
//! derived from the caller's seed and a stage tag, so outputs depend only on
//! (input, seed) and are identical across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed for `stage` from `seed`.
pub fn derive(seed: u64, stage: u64) -> u64 {
    mix64(seed ^ mix64(stage.wrapping_add(0x5EED)))
}

/// FNV-1a over a string, used to fold identifiers into seeds.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
