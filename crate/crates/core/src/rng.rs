//! Deterministic random streams.
//!
//! Every stochastic component takes an explicit `&mut SimRng`. Child streams
//! are derived from a master seed and a textual key with a stable hash, so a
//! given experiment cell always sees the same stream regardless of which
//! worker runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stable 64-bit child seed for `(master, key)`.
///
/// FNV-1a over the master seed bytes and the key, followed by a SplitMix64
/// finalizer. Does not depend on `std`'s randomized hasher.
pub fn derive_seed(master: u64, key: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET;
    for b in master.to_le_bytes().iter().chain(key.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(h)
}

pub fn derive_rng(master: u64, key: &str) -> SimRng {
    rng_from_seed(derive_seed(master, key))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
