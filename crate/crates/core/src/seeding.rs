//! Deterministic seed derivation.
//!
//! Every random stream in a run is keyed by a tuple of integers (run seed,
//! outer iteration, member index, ...). The tuple is folded through a
//! splitmix64 finalizer so neighbouring keys produce unrelated seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used everywhere in the crate.
pub type SimRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One splitmix64 output step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a key tuple into a single 64-bit seed.
///
/// `derive_seed(&[a, b])` and `derive_seed(&[a, b, 0])` differ because the
/// tuple length is mixed in first.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h = splitmix64(parts.len() as u64);
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn rng_from_parts(parts: &[u64]) -> SimRng {
    rng_from_seed(derive_seed(parts))
}
