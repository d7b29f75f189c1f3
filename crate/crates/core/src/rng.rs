//! Reproducible random streams.
//!
//! Every path is driven by a ChaCha12 generator, which is counter based:
//! a 64-bit seed picks the key and a 64-bit stream id picks an independent
//! keystream. Replication seeds are derived with the SplitMix64 finalizer so
//! that any (base seed, cell, replication) triple maps to a fixed stream no
//! matter in which order or on which thread it is run.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

/// Stream id for the observed path itself.
pub const PATH_STREAM: u64 = 0;
/// Stream id for the burn-in run that produces a stationary start.
pub const BURN_IN_STREAM: u64 = 1;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` in study cell `cell`.
pub fn replication_seed(base_seed: u64, cell: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(base_seed ^ splitmix64(cell)) ^ rep)
}

/// Generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
