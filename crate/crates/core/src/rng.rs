//! Seeding. Every random draw in the crate comes from ChaCha8 (rand_chacha),
//! keyed by a 64-bit seed expanded with `SeedableRng::seed_from_u64`, and
//! addressed by a 64-bit stream number. ChaCha is counter based, so stream
//! `k` of seed `s` is the same sequence on every platform and thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed: one SplitMix64 step from state `seed + (salt + 1) * 0x9E3779B97F4A7C15`.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed
        .wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
