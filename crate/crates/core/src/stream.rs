//! Deterministic random streams.
//!
//! Every Monte Carlo quantity in this crate is driven by a stream derived
//! from a root seed and a tuple of integer labels (state, action, trajectory
//! index, ...). A stream depends only on its labels, never on which worker
//! runs it or in what order, so parallel and sequential runs agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The concrete generator behind every stream.
pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes `seed` and `labels` into a single 64-bit word.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ 0x6A09_E667_F3BC_C908);
    for (i, &label) in labels.iter().enumerate() {
        h = splitmix64(h ^ splitmix64(label.wrapping_add((i as u64) << 56)));
    }
    h
}

/// A generator seeded from `(seed, labels...)`.
pub fn derive_stream(seed: u64, labels: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, labels))
}
