//! Seeded, splittable random streams.
//!
//! Every random object in the crate is drawn from a [`ChaCha8Rng`] whose seed
//! is derived from a master seed and a path of integers (stage, candidate,
//! frame, ...). Streams for distinct paths are independent, so work can be
//! scheduled on any number of threads without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domain tags keep streams for unrelated purposes apart even when their
/// numeric paths coincide.
pub mod domain {
    pub const LIFT_CANDIDATE: u64 = 0x4c49_4654;
    pub const FRAME: u64 = 0x4652_414d;
    pub const CODEWORD_SAMPLE: u64 = 0x434f_4457;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `path` into `seed`, one component at a time.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Generator for the stream at `path` under `seed`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive(seed, path))
}
