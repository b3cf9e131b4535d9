//! Seedable random streams.
//!
//! Every stream is a ChaCha8 keystream keyed by `master_seed` and positioned on
//! the ChaCha stream id `stream_index`, so two streams with the same pair
//! produce the same draws on every platform and distinct indices never
//! overlap. Uniforms use the top 53 bits of each 64-bit word, offset by half
//! an ulp so that they lie in the open interval (0, 1). Normals come from the
//! Box–Muller transform, both halves of each pair being used.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            inner,
            spare_normal: None,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53
    }

    /// Uniform draw on `[low, high]`; returns `low` when the range is degenerate.
    pub fn uniform_range(&mut self, low: f64, high: f64) -> f64 {
        let u = self.uniform();
        if high <= low {
            low
        } else {
            low + (high - low) * u
        }
    }

    /// Uniform integer in `0..bound` by rejection sampling (no modulo bias).
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "bound must be positive");
        let bound = bound as u64;
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % bound) as usize;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Draws `n` normal variates.
pub fn sample_normal(rng: &mut RngStream, n: usize, mean: f64, sd: f64) -> Result<Vec<f64>> {
    if !(sd >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "standard deviation {sd} < 0"
        )));
    }
    Ok((0..n).map(|_| mean + sd * rng.standard_normal()).collect())
}

/// Inverse CDF of the Cauchy distribution.
pub fn cauchy_quantile(u: f64, location: f64, scale: f64) -> f64 {
    location + scale * (std::f64::consts::PI * (u - 0.5)).tan()
}

/// Draws `n` Cauchy variates by inversion.
pub fn sample_cauchy(rng: &mut RngStream, n: usize, location: f64, scale: f64) -> Result<Vec<f64>> {
    if !(scale > 0.0) {
        return Err(Error::NonPositiveScale(scale));
    }
    Ok((0..n)
        .map(|_| cauchy_quantile(rng.uniform(), location, scale))
        .collect())
}
