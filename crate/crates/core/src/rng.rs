//! Seeded random streams.
//!
//! Every random choice in the crate draws from [`Rng`], which is ChaCha8. It
//! produces the same stream on every platform for a given seed. Sub-streams
//! (per density, per repetition, per shot) are derived by mixing the parent
//! seed with the stream indices through SplitMix64 finalizers.

use rand::SeedableRng;

pub type Rng = rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a path of stream indices.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(seed), |acc, &i| splitmix(acc ^ splitmix(i.wrapping_add(0x5851_F42D))))
}

pub fn rng_from(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn derive_rng(seed: u64, path: &[u64]) -> Rng {
    rng_from(derive_seed(seed, path))
}
