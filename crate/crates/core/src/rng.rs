//! Deterministic seed derivation.
//!
//! Every sample in an audit draws from its own ChaCha stream whose seed is a
//! pure function of `(master seed, family id, sample index)`, so results do not
//! depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default master seed recorded in every report.
pub const DEFAULT_SEED: u64 = 0xF0CA1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the family label, folded into the master seed and index.
pub fn derive_seed(master: u64, family: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in family.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(master ^ h).wrapping_add(index))
}

pub fn stream(master: u64, family: &str, index: u64) -> ChaCha8Rng {
    stream_from_seed(derive_seed(master, family, index))
}

pub fn stream_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
