//! Deterministic, counter-based random streams.
//!
//! Both the sampler and the Monte Carlo quadrature draw from ChaCha streams
//! keyed by `(seed, stream index)`. Stream indices are independent of
//! execution order and worker count, so any computation that assigns a fixed
//! index per unit of work (trial, chunk, ...) is bit-reproducible under
//! arbitrary parallel scheduling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Returns the ChaCha stream for `(seed, index)`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent 64-bit seed from a master seed and an index.
///
/// SplitMix64 finalizer over `seed ^ golden_gamma * (index + 1)`; used to give
/// nested components (e.g. per-trial approximation runs) their own seed space
/// without correlating with the point streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ (index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws a uniform 53-bit dyadic rational in `[0, 1)`.
///
/// The value is `m / 2^53` with `m` uniform over `0..2^53`, so every sample
/// is exactly representable in `f64` and exact-equality comparisons between
/// independently sampled points are meaningful (collision probability
/// `2^-53` per coordinate).
pub fn dyadic_unit(rng: &mut ChaCha8Rng) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (rng.next_u64() >> 11) as f64 * SCALE
}
