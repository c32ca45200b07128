//! Counter-style keyed random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator whose
//! 256-bit key is the little-endian concatenation of four 64-bit words:
//! `(seed, major, minor, tag)`. For the simulator these are
//! `(seed, episode index, record index, agent tag)`; for the bootstrap
//! `(seed, resample index, 0, BOOTSTRAP)`. Streams never share state, so the
//! output does not depend on iteration order or on how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags.
pub mod tag {
    pub const TRUTH: u64 = 1;
    pub const HUMAN: u64 = 2;
    pub const AI: u64 = 3;
    pub const BOOTSTRAP: u64 = 16;
}

pub fn keyed_rng(seed: u64, major: u64, minor: u64, tag: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([seed, major, minor, tag]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
