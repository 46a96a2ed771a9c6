//! Deterministic seed derivation.
//!
//! Experiments fan out into many independent runs (cells of a parameter
//! grid times repetitions), each of which needs its own RNG seed. Seeds
//! are derived by folding the base seed and the run's coordinates through
//! a SplitMix64 chain, so results are reproducible from the manifest
//! alone and independent of scheduling or thread count. The mixer is
//! fixed here rather than taken from `std` so the mapping never changes
//! out from under recorded manifests.

/// One round of the SplitMix64 output function.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and an ordered list of coordinates
/// (grid indices, repetition index, sub-stream tags). Distinct coordinate
/// lists yield distinct seeds except for 2^-64-scale hash collisions.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &part in parts {
        state = splitmix64(state ^ splitmix64(part));
    }
    state
}
