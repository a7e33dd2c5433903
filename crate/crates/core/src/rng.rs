//! Deterministic, splittable randomness and the Poisson sampler.
//!
//! Every random decision in the crate is drawn from an [`RngStream`] identified by a
//! `(seed, stream id)` pair. Child streams are derived from the parent's identity (not
//! from its position), so the draws made for one member, fold or cost point never
//! perturb another.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tags used to derive purpose-specific child streams.
pub mod tag {
    pub const RESAMPLE: u64 = 1;
    pub const UNDERSAMPLE: u64 = 2;
    pub const SMOTE: u64 = 3;
    pub const PRESENT: u64 = 4;
    pub const FOLDS: u64 = 5;
    pub const SHUFFLE: u64 = 6;
    pub const MEMBER: u64 = 7;
    pub const COST_POINT: u64 = 8;
    pub const DRIFT: u64 = 9;
    pub const SYNTHETIC: u64 = 10;
    pub const SPLIT: u64 = 11;
}

/// A reproducible random stream. Identical `(seed, stream)` pairs yield identical draws.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Derives an independent child stream keyed by `tag`.
    pub fn child(&self, tag: u64) -> Self {
        let id = splitmix64(self.stream ^ splitmix64(tag.wrapping_add(0x5851_F42D_4C95_7F2D)));
        Self::new(self.seed, id)
    }

    /// Convenience for `child(a).child(b)`.
    pub fn child2(&self, a: u64, b: u64) -> Self {
        self.child(a).child(b)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.rng.random_range(0..n)
    }

    /// Draws `k ~ Poisson(lambda)`; see [`poisson_sample`].
    pub fn poisson(&mut self, lambda: f64) -> Result<u64> {
        poisson_sample(lambda, self)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Largest rate handled by a single inversion pass.
const INVERSION_LIMIT: f64 = 30.0;

/// Exact Poisson sampling.
///
/// Rates up to 30 use inversion by sequential search. Larger rates are split into
/// `ceil(lambda / 30)` equal chunks whose independent draws are summed, which keeps
/// the result exactly Poisson(lambda) without a normal approximation.
/// A rate of zero returns 0 without consuming randomness.
pub fn poisson_sample(lambda: f64, rng: &mut RngStream) -> Result<u64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::arg(format!("Poisson rate must be finite and >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    if lambda <= INVERSION_LIMIT {
        return Ok(poisson_inversion(lambda, rng));
    }
    let chunks = (lambda / INVERSION_LIMIT).ceil();
    let part = lambda / chunks;
    let mut total = 0;
    for _ in 0..chunks as u64 {
        total += poisson_inversion(part, rng);
    }
    Ok(total)
}

fn poisson_inversion(lambda: f64, rng: &mut RngStream) -> u64 {
    let u = rng.uniform();
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u > cdf {
        k += 1;
        p *= lambda / k as f64;
        if p == 0.0 {
            // cdf has saturated below u through rounding; the remaining tail mass is
            // below f64 resolution.
            break;
        }
        cdf += p;
    }
    k
}
