//! Seeded random streams.
//!
//! Every independent unit of work (one grid point of one run) owns a
//! [`SimRng`] derived from the master seed by [`stream`]. The generator is
//! ChaCha8 from `rand_chacha`, whose output sequence is fixed by the
//! algorithm, and uniforms are built from the top 53 bits of `next_u64`, so
//! a given seed produces the same events on every platform and release.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the stream seed for `(seed, point, stage)`.
///
/// `s = mix64(mix64(mix64(seed ^ G) ^ (point + 1)·G) ^ (stage + 1)·G)` with
/// `G = 0x9E3779B97F4A7C15`.
pub fn stream_seed(seed: u64, point: u64, stage: u64) -> u64 {
    let a = mix64(seed ^ GOLDEN);
    let b = mix64(a ^ point.wrapping_add(1).wrapping_mul(GOLDEN));
    mix64(b ^ stage.wrapping_add(1).wrapping_mul(GOLDEN))
}

pub fn stream(seed: u64, point: u64, stage: u64) -> SimRng {
    SimRng::seed_from_u64(stream_seed(seed, point, stage))
}

/// Uniform deviate in `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
