//! Seeded, splittable random streams.
//!
//! Every stochastic step draws from a ChaCha8 stream addressed by
//! `(master seed, stream id)`. Noisy shots, which need only a handful of
//! words each, use a SplitMix64 generator keyed by a hash of
//! `(master seed, stream id, shot)`. Results therefore depend only on these
//! coordinates and never on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::SplitMix64;

/// SplitMix64 finalizer, used to fold tags into derived seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a sequence of tags.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(mix64(seed), |acc, &t| mix64(acc ^ mix64(t.wrapping_add(0x5151))))
}

/// Stream `stream` of the generator keyed by `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for a single shot.
pub fn shot_stream(seed: u64, stream_id: u64, shot: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(derive_seed(seed, &[stream_id, shot]))
}

/// Reserved stream ids outside the subexperiment range.
pub mod streams {
    pub const QPD_SAMPLING: u64 = u64::MAX;
    pub const SPLIT: u64 = u64::MAX - 1;
    pub const INIT_WEIGHTS: u64 = u64::MAX - 2;
    pub const BATCHES: u64 = u64::MAX - 3;
    pub const SYNTH: u64 = u64::MAX - 4;
    pub const UNCUT: u64 = u64::MAX - 5;

    /// Stream id of fragment `fragment` of subexperiment `id`.
    pub fn fragment(id: u64, fragment: usize) -> u64 {
        (id << 8) | fragment as u64
    }
}
