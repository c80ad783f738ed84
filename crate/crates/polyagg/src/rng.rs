//! Deterministic seeding helpers.
//!
//! Every random choice in the crate flows from a single user-visible seed
//! through named sub-streams, so individual components (dataset generation,
//! weight initialization, shuffling, k-means restarts, …) can be re-run in
//! isolation without perturbing each other's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives an independent RNG for `label` from the global `seed`.
pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ fnv1a(label)))
}

/// Derives an independent RNG for the `index`-th item of the `label` stream.
/// Used where work items must be reproducible individually (e.g. the i-th
/// dataset mesh) rather than only as a sequence.
pub fn stream_indexed(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let base = splitmix64(seed ^ fnv1a(label));
    ChaCha8Rng::seed_from_u64(splitmix64(base.wrapping_add(index)))
}
