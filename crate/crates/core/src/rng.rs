//! Seeded random streams for simulations.
//!
//! Every realization draws from its own ChaCha8 stream (the `rand_chacha`
//! implementation, which is counter-based and produces the same sequence on
//! every platform). The 256-bit key of a stream is the little-endian
//! concatenation
//!
//! ```text
//! key = master_seed (u64) || grid_index (u64) || realization (u64) || 0u64
//! ```
//!
//! so distinct `(master, grid, realization)` triples always get distinct keys.
//! No hashing is involved, hence no collisions.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name written into output metadata.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha 0.9); key = LE(master_seed) || LE(grid_index) || LE(realization) || 0u64";

#[derive(Clone, Debug)]
pub struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn for_stream(master_seed: u64, grid_index: u64, realization: u64) -> Self {
        SimRng(ChaCha8Rng::from_seed(stream_key(
            master_seed,
            grid_index,
            realization,
        )))
    }

    /// Shorthand for stream `(seed, 0, 0)`.
    pub fn from_seed_u64(seed: u64) -> Self {
        Self::for_stream(seed, 0, 0)
    }
}

pub fn stream_key(master_seed: u64, grid_index: u64, realization: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&grid_index.to_le_bytes());
    key[16..24].copy_from_slice(&realization.to_le_bytes());
    key
}

impl RngCore for SimRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}
