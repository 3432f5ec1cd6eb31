//! Deterministic seed derivation.
//!
//! Every stochastic step in a run (graph build, map build, attack set, each
//! realization of an ensemble) draws its RNG seed from the master seed plus a
//! list of labels via a fixed mixing function. Results are therefore byte
//! reproducible across runs and independent of thread scheduling.

/// splitmix64 step; a fixed, well-mixed 64-bit permutation.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold `parts` into `master`, one splitmix64 round per component.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

/// Stable encoding for floating-point seed components.
#[inline]
pub fn f64_bits(x: f64) -> u64 {
    // normalize -0.0 so that 0.0 and -0.0 derive the same stream
    if x == 0.0 {
        0u64
    } else {
        x.to_bits()
    }
}
