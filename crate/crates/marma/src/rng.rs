//! Deterministic derivation of independent random substreams.
//!
//! Monte Carlo replicas and bootstrap paths each get their own generator,
//! derived from a root seed and a path of indices. The derivation is a
//! SplitMix64 chain, so a stream's draws depend only on `(seed, path)` and
//! never on scheduling order or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Returns the generator for substream `path` of the stream rooted at `seed`.
///
/// Distinct paths yield independent streams; the same `(seed, path)` always
/// yields the same stream.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = seed ^ 0x6A09_E667_F3BC_C908;
    splitmix64(&mut state);
    for &id in path {
        state ^= id.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
