//! Seeding rules.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`), which
//! produces the same stream on every platform for a given seed. Replicates
//! and walks never share a generator: replicate `r` of an experiment with base
//! seed `s` uses `splitmix64(s + r)`, and walk `i` of a Monte Carlo estimate
//! uses stream `i` of the estimate's seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SbmRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SbmRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the `stream`-th independent sub-sequence of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SbmRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn replicate_seed(base: u64, replicate: usize) -> u64 {
    splitmix64(base.wrapping_add(replicate as u64))
}
