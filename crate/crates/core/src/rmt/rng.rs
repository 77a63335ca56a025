//! Deterministic, stream-addressed randomness for the matrix oracle.
//!
//! Every random object consumed by the Monte Carlo driver has an absolute
//! address `(seed, purpose, trial, word offset)` in a counter-based stream
//! cipher. Draws are therefore independent of execution order: trials can run
//! in parallel, trial counts can grow without disturbing earlier trials, and
//! a fixed configuration reproduces bit-identical output on every run.

use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-step Haar rotations of the product ensemble.
pub(crate) const PURPOSE_HAAR_STEP: u64 = 1;
/// The initial Haar frame of a projected-volume run.
pub(crate) const PURPOSE_HAAR_PROJ: u64 = 2;
/// The conjugating rotation of a corner-compression run.
pub(crate) const PURPOSE_COMPRESS: u64 = 3;
/// The rotation of a projection-rank run.
pub(crate) const PURPOSE_RANK: u64 = 4;
/// Per-step singular-value draws in iid sampling mode.
pub(crate) const PURPOSE_SAMPLE_D: u64 = 5;

/// A generator positioned at the given absolute address.
pub(crate) fn rng_at(seed: u64, purpose: u64, trial: u64, word_pos: u128) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream((purpose << 32) | (trial & 0xffff_ffff));
    rng.set_word_pos(word_pos);
    rng
}

/// 32-bit words consumed when filling `count` Gaussians (Box–Muller pairs of
/// 64-bit draws), padded so consecutive blocks never overlap.
pub(crate) fn gaussian_stride(count: usize) -> u128 {
    (4 * count.div_ceil(2) + 8) as u128
}

/// 32-bit words consumed when drawing `count` uniforms.
pub(crate) fn uniform_stride(count: usize) -> u128 {
    (2 * count + 8) as u128
}

/// Uniform in the half-open interval `(0, 1]`; never zero, so logarithms
/// stay finite.
fn unit_half_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 1.0) * 2f64.powi(-53)
}

/// Uniform in the open interval `(0, 1)`.
pub(crate) fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * 2f64.powi(-53)
}

/// Fills `buf` with standard Gaussians by Box–Muller, consuming a fixed
/// number of words independent of the values drawn.
pub(crate) fn fill_gaussian(rng: &mut ChaCha8Rng, buf: &mut [f64]) {
    let mut i = 0;
    while i < buf.len() {
        let u1 = unit_half_open(rng.next_u64());
        let u2 = unit_half_open(rng.next_u64());
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        buf[i] = radius * c;
        if i + 1 < buf.len() {
            buf[i + 1] = radius * s;
        }
        i += 2;
    }
}

/// Draws `count` uniforms in `(0, 1)`.
pub(crate) fn draw_uniforms(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| unit_open(rng.next_u64())).collect()
}
