//! Counter-based randomness.
//!
//! Every random value is a pure function of `(seed, x, y, lane)`, where
//! `lane` is a channel index for seeds and a step index for update masks.
//! The key is built in two SplitMix64 finalizer rounds:
//!
//! ```text
//! cell = finalize(seed ^ (y << 32 | x))
//! bits = finalize(cell + GOLDEN · (lane + 1))
//! ```
//!
//! Uniforms take the top 53 bits. Nothing depends on evaluation order, so
//! results are identical for any thread count.

/// SplitMix64 increment (the 64-bit golden ratio).
pub const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output finalizer.
#[inline]
pub fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Maps the top 53 bits to `[0, 1)`.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
pub fn cell_bits(seed: u64, x: usize, y: usize, lane: u64) -> u64 {
    let cell = finalize(seed ^ ((y as u64) << 32 | x as u64));
    finalize(cell.wrapping_add(GOLDEN.wrapping_mul(lane.wrapping_add(1))))
}

/// Uniform in `[0, 1)` for one `(cell, lane)`.
#[inline]
pub fn cell_uniform(seed: u64, x: usize, y: usize, lane: u64) -> f64 {
    unit_f64(cell_bits(seed, x, y, lane))
}

/// Value in `[-eps, eps]` for one `(cell, channel)`.
#[inline]
pub fn cell_symmetric(seed: u64, x: usize, y: usize, channel: usize, eps: f64) -> f32 {
    (eps * (2.0 * cell_uniform(seed, x, y, channel as u64) - 1.0)) as f32
}

/// Bernoulli(½) update gate for cell `(x, y)` at step `step`.
#[inline]
pub fn mask_bit(seed: u64, x: usize, y: usize, step: u64) -> bool {
    cell_uniform(seed, x, y, step) < 0.5
}

/// Sequential stream over the same finalizer (plain SplitMix64), used for
/// parameter initialization where there is no spatial index.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        finalize(self.state)
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    #[inline]
    pub fn symmetric(&mut self, bound: f32) -> f32 {
        (f64::from(bound) * (2.0 * self.uniform() - 1.0)) as f32
    }
}
