//! Splittable seeding.
//!
//! One global seed fans out into independent streams keyed by a purpose tag
//! and an index, so that parallel jobs draw from their own generator and the
//! results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags used across the crate.
pub mod stream {
    pub const NETWORK: u64 = 0x4e45_5457;
    pub const TREE: u64 = 0x5452_4545;
    pub const PERMUTE: u64 = 0x5045_524d;
    pub const SPLIT: u64 = 0x5350_4c54;
    pub const FOLDS: u64 = 0x464f_4c44;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the sub-seed for `(stream, index)` from `seed`.
pub fn derive(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)
}

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
