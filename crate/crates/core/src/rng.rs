//! Seeded random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

/// SplitMix64 finalizer over `(seed, index)`; used to derive independent
/// per-repetition and per-mechanism seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// A fresh stream whose seed is drawn from `parent`.
pub fn fork<R: rand::Rng + ?Sized>(parent: &mut R) -> StreamRng {
    StreamRng::seed_from_u64(parent.gen())
}
