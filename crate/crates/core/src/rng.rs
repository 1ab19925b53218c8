//! Deterministic substream derivation for parallel Monte Carlo.
//!
//! Every realization owns a private generator derived from
//! `(master_seed, index)` through a SplitMix64 counter mix, so the ensemble
//! output is a pure function of the seed and the realization index — never of
//! thread scheduling or worker count.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// SplitMix64 step: advances `state` and returns a well-mixed 64-bit word.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent, reproducible generator for realization `index` under
/// `master_seed`. The 256-bit ChaCha seed is filled from four SplitMix64
/// outputs of the counter-mixed state.
pub fn substream_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ index.wrapping_mul(0xa02b_dbf7_bb3c_0a7b);
    // one warm-up step decorrelates adjacent (seed, index) pairs
    let _ = splitmix64(&mut state);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
