//! Adaptation: the per-cell two-layer network mapping a perception vector to
//! the residual update `ΔS = W2 · relu(W1 · z + b1)`.
//!
//! Storage and accumulation are both `f32`. Each output is summed in input
//! order; the loops are arranged so that the order is the same for every
//! cell, which keeps results bitwise reproducible.

use alloc::vec;
use alloc::vec::Vec;

use crate::perception::PerceptionField;
use crate::weights::RuleWeights;
use crate::{par, Error, Result};

/// Cells evaluated together in a row.
const BLOCK: usize = 4;
/// Hidden units accumulated together.
const TILE: usize = 16;

/// Residual update field `ΔS`, `H×W×C`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateField {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

/// A rule laid out for evaluation: both matrices transposed so the inner
/// loops run over contiguous output units.
#[derive(Debug, Clone)]
pub struct Network {
    inputs: usize,
    hidden: usize,
    channels: usize,
    /// `inputs × hidden`
    w1t: Vec<f32>,
    b1: Vec<f32>,
    /// `hidden × channels`
    w2t: Vec<f32>,
}

impl Network {
    pub fn new(weights: &RuleWeights) -> Self {
        let (inputs, hidden, channels) = (weights.inputs(), weights.hidden, weights.channels);
        let mut w1t = vec![0.0; inputs * hidden];
        for d in 0..hidden {
            for j in 0..inputs {
                w1t[j * hidden + d] = weights.w1[d * inputs + j];
            }
        }
        let mut w2t = vec![0.0; hidden * channels];
        for c in 0..channels {
            for d in 0..hidden {
                w2t[d * channels + c] = weights.w2[c * hidden + d];
            }
        }
        Self {
            inputs,
            hidden,
            channels,
            w1t,
            b1: weights.b1.clone(),
            w2t,
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Evaluates one cell. `scratch` must hold `hidden` values.
    #[inline]
    pub fn eval_cell(&self, z: &[f32], scratch: &mut [f32], out: &mut [f32]) {
        let hidden = &mut scratch[..self.hidden];
        hidden.copy_from_slice(&self.b1);
        for (j, &zj) in z[..self.inputs].iter().enumerate() {
            if zj == 0.0 {
                continue;
            }
            let col = &self.w1t[j * self.hidden..(j + 1) * self.hidden];
            for (h, &w) in hidden.iter_mut().zip(col) {
                *h += w * zj;
            }
        }
        // relu; inactive units contribute nothing
        self.second_layer(hidden, &mut out[..self.channels]);
    }

    /// Evaluates a row of perception vectors (`W × inputs`) into `out`
    /// (`W × channels`). `scratch` must hold `hidden` values.
    pub fn eval_row(&self, z_row: &[f32], scratch: &mut [f32], out: &mut [f32]) {
        let mut z_blocks = z_row.chunks_exact(BLOCK * self.inputs);
        let mut out_blocks = out.chunks_exact_mut(BLOCK * self.channels);
        let mut hidden = vec![0.0f32; BLOCK * self.hidden];
        for (z, o) in (&mut z_blocks).zip(&mut out_blocks) {
            self.eval_block(z, &mut hidden, o);
        }
        for (z, o) in z_blocks
            .remainder()
            .chunks_exact(self.inputs)
            .zip(out_blocks.into_remainder().chunks_exact_mut(self.channels))
        {
            self.eval_cell(z, scratch, o);
        }
    }

    /// Hidden pre-activations for `BLOCK` cells at once, tiled over hidden
    /// units so each weight column is loaded once per block. Every unit is
    /// still summed bias first, then inputs in order, as in `eval_cell`.
    /// Zero inputs are not skipped here; that only changes the sign of zero
    /// pre-activations, which the rectifier discards either way.
    fn eval_block(&self, z: &[f32], hidden: &mut [f32], out: &mut [f32]) {
        #[cfg(all(feature = "std", target_arch = "x86_64"))]
        if std::is_x86_feature_detected!("avx") {
            // SAFETY: the CPU supports AVX, checked just above.
            unsafe { self.eval_block_avx(z, hidden, out) };
            return;
        }
        self.eval_block_generic(z, hidden, out);
    }

    /// Same arithmetic as the generic kernel (separate multiply and add, no
    /// fused operations), so results are bitwise identical; only the vector
    /// width changes.
    #[cfg(all(feature = "std", target_arch = "x86_64"))]
    #[target_feature(enable = "avx")]
    unsafe fn eval_block_avx(&self, z: &[f32], hidden: &mut [f32], out: &mut [f32]) {
        self.eval_block_generic(z, hidden, out);
    }

    #[inline(always)]
    fn eval_block_generic(&self, z: &[f32], hidden: &mut [f32], out: &mut [f32]) {
        self.first_layer_block(z, hidden);
        for (h, o) in hidden
            .chunks_exact(self.hidden)
            .zip(out.chunks_exact_mut(self.channels))
        {
            self.second_layer(h, o);
        }
    }

    #[inline(always)]
    fn first_layer_block(&self, z: &[f32], hidden: &mut [f32]) {
        let (n_in, n_hid) = (self.inputs, self.hidden);
        // inputs interleaved across the block: zt[j][b]
        let mut zt = vec![[0.0f32; BLOCK]; n_in];
        for (b, cell) in z.chunks_exact(n_in).enumerate() {
            for (slot, &v) in zt.iter_mut().zip(cell) {
                slot[b] = v;
            }
        }
        let tiles = n_hid / TILE;
        for t in 0..tiles {
            let base = t * TILE;
            let bias: &[f32; TILE] = self.b1[base..base + TILE].try_into().expect("tile width");
            let mut acc = [*bias; BLOCK];
            for (col, zs) in self.w1t.chunks_exact(n_hid).zip(&zt) {
                let col: &[f32; TILE] = col[base..base + TILE].try_into().expect("tile width");
                for (a, &zj) in acc.iter_mut().zip(zs) {
                    for k in 0..TILE {
                        a[k] += col[k] * zj;
                    }
                }
            }
            for (b, a) in acc.iter().enumerate() {
                hidden[b * n_hid + base..b * n_hid + base + TILE].copy_from_slice(a);
            }
        }
        let rest = tiles * TILE;
        if rest < n_hid {
            for b in 0..BLOCK {
                let h = &mut hidden[b * n_hid + rest..(b + 1) * n_hid];
                h.copy_from_slice(&self.b1[rest..]);
                for (col, zs) in self.w1t.chunks_exact(n_hid).zip(&zt) {
                    for (hv, &w) in h.iter_mut().zip(&col[rest..]) {
                        *hv += w * zs[b];
                    }
                }
            }
        }
    }

    #[inline(always)]
    fn second_layer(&self, hidden: &[f32], out: &mut [f32]) {
        out.fill(0.0);
        for (&h, row) in hidden.iter().zip(self.w2t.chunks_exact(self.channels)) {
            // Rectified units contribute `w · 0`, which leaves every partial
            // sum unchanged (they start at +0 and never become -0), so
            // selecting instead of branching gives identical bits. NaN
            // passes through and is caught as divergence.
            let r = if h <= 0.0 { 0.0 } else { h };
            for (o, &w) in out.iter_mut().zip(row) {
                *o += w * r;
            }
        }
    }
}

/// `ΔS` for every cell of a perception field.
pub fn residual(z: &PerceptionField, weights: &RuleWeights) -> Result<UpdateField> {
    if z.inputs != weights.inputs() {
        return Err(Error::DimensionMismatch {
            what: "perception width",
            expected: weights.inputs(),
            actual: z.inputs,
        });
    }
    if z.channels != weights.channels {
        return Err(Error::DimensionMismatch {
            what: "perception channels",
            expected: weights.channels,
            actual: z.channels,
        });
    }
    let net = Network::new(weights);
    let c = weights.channels;
    let mut data = vec![0.0f32; z.height * z.width * c];
    let row_in = z.width * z.inputs;
    par::for_each_row(&mut data, z.width * c, |y, out| {
        let mut scratch = vec![0.0f32; net.hidden()];
        net.eval_row(&z.data[y * row_in..(y + 1) * row_in], &mut scratch, out);
    });
    Ok(UpdateField {
        height: z.height,
        width: z.width,
        channels: c,
        data,
    })
}
