//! Counter-addressed random streams for reproducible parallel simulation.
//!
//! Slots are grouped into fixed blocks of [`BLOCK_SLOTS`]. Every block reads
//! its own ChaCha8 stream: the 256-bit key is expanded from the user seed
//! with SplitMix64 and the ChaCha stream id is the block index. Each slot
//! consumes exactly one 64-bit word per power level, so the words a slot sees
//! depend only on `(seed, slot index)` and never on how blocks are scheduled
//! across threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Version-pinned name recorded in every output manifest.
pub const RNG_ALGORITHM: &str =
    "chacha8-v1 (rand_chacha 0.9; key=splitmix64x4(seed); stream=block index; 4096 slots/block; u53 uniforms)";

pub const BLOCK_SLOTS: u64 = 4096;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of sweep point `index` from a run seed:
/// `splitmix64(seed + (index + 1)·0x9E3779B97F4A7C15)` with wrapping
/// arithmetic.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

fn expand_key(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN_GAMMA);
        chunk.copy_from_slice(&splitmix64(state).to_le_bytes());
    }
    key
}

/// The random stream for one block of slots.
#[derive(Clone, Debug)]
pub struct BlockStream {
    rng: ChaCha8Rng,
}

impl BlockStream {
    pub fn new(seed: u64, block: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(expand_key(seed));
        rng.set_stream(block);
        Self { rng }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
