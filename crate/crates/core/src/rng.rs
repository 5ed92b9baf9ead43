//! Seeded random streams and the Gaussian draw used throughout the crate.
//!
//! All randomness goes through [`RunRng`] (ChaCha8), so a seed fully
//! determines every draw on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

/// Independent streams derived from one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Split = 1,
    Init = 2,
    Batches = 3,
    Data = 4,
}

pub fn seeded(seed: u64) -> RunRng {
    RunRng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: Stream) -> RunRng {
    let mut rng = RunRng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Box–Muller transform. Consumes two uniforms `u1, u2` (in that order) and
/// returns `(r cos θ, r sin θ)` with `r = sqrt(-2 ln u1)`, `θ = 2π u2`.
pub fn normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    // 1 - U[0,1) lies in (0, 1], keeping ln finite.
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Fill `out` with standard normal draws. Pairs are produced by
/// [`normal_pair`] and written in order; an odd tail discards the sine half.
pub fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut chunks = out.chunks_exact_mut(2);
    for pair in &mut chunks {
        let (a, b) = normal_pair(rng);
        pair[0] = a;
        pair[1] = b;
    }
    if let [last] = chunks.into_remainder() {
        *last = normal_pair(rng).0;
    }
}

pub fn standard_normal_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    fill_standard_normal(rng, &mut v);
    v
}
