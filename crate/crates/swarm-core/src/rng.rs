//! Deterministic labeled random streams.
//!
//! Every random draw in the simulator comes from a stream derived from one
//! run seed plus a string label (`"uwb"`, `"camera:2"`, ...). Identical
//! `(seed, label)` pairs always yield identical sequences, and distinct
//! labels give statistically independent streams, so per-drone sensor
//! synthesis can run in any order (or in parallel) without changing a run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Builds the deterministic stream for `(seed, label)`.
pub fn seeded_stream(seed: u64, label: &str) -> StreamRng {
    // FNV-1a over the label, then SplitMix64 to expand (seed, label hash)
    // into a full 256-bit ChaCha key.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in label.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut s = seed;
    let mut state = splitmix64(&mut s) ^ h;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
