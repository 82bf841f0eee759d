//! Deterministic random draws.
//!
//! Everything random in this crate flows through ChaCha8 streams seeded
//! explicitly by the caller. The mapping from raw 64-bit outputs to floats
//! and permutations is fixed here, so a seed fully determines every draw:
//!
//! - uniforms take the top 53 bits of one `next_u64`;
//! - each standard-normal deviate consumes exactly two `next_u64` outputs
//!   (Box-Muller, cosine branch);
//! - shuffles are Fisher-Yates from the last index down, one `next_u64`
//!   per step.

pub use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// A ChaCha8 stream for the given seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on `[0, 1)`.
pub fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `(0, 1]`, safe as a logarithm argument.
pub fn uniform_open01(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal deviate. Consumes two `next_u64` outputs; the sine
/// branch of the Box-Muller pair is discarded to keep the draw order a
/// simple function of the call count.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = uniform_open01(rng);
    let u2 = uniform01(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Bernoulli draw with success probability `p`. Consumes one `next_u64`.
pub fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    uniform01(rng) < p
}

/// Index uniform on `0..n`. The modulo bias is below 1e-14 for any `n`
/// this crate uses and irrelevant to determinism.
pub fn next_index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle<T>(rng: &mut ChaCha8Rng, xs: &mut [T]) {
    for i in (1..xs.len()).rev() {
        let j = next_index(rng, i + 1);
        xs.swap(i, j);
    }
}
