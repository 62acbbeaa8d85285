//! Counter-derived random streams.
//!
//! Every independent unit of Monte Carlo work (a bootstrap replicate, a bench
//! trial, a lag offset) gets its own ChaCha8 stream keyed by the user seed and
//! identified by a path of counters. Results therefore depend only on
//! `(seed, path)`, never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapse a counter path into a single stream id.
pub fn stream_id(path: &[u64]) -> u64 {
    path.iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

/// The stream for `path` under `seed`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(path));
    rng
}

/// Derive a child seed, for handing a sub-experiment its own seed space.
pub fn child_seed(seed: u64, path: &[u64]) -> u64 {
    splitmix64(seed ^ stream_id(path))
}
