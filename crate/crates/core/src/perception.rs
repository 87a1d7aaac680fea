//! Perception: per-cell identity, gradient and Laplacian estimates from the
//! 3×3 neighborhood, rescaled by the local cell size so the estimates stay
//! consistent across resolutions.
//!
//! Stencils are applied as cross-correlations (no kernel flip), with row 0
//! of each kernel at `y - 1` and column 0 at `x - 1`. The Laplacian is
//! evaluated through its axis decomposition
//! `∇² ≈ K_lap^x / Δx² + K_lap^y / Δy²`, which reduces to `K_lap / Δx²` when
//! the cell is square.

use alloc::vec;
use alloc::vec::Vec;

use crate::discretization::{CellSize, Discretization};
use crate::grid::CellGrid;
use crate::weights::{Padding, RuleWeights, Variant};
use crate::{par, Error, Result};

pub type Kernel = [[f32; 3]; 3];

pub const K_ID: Kernel = [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]];
pub const K_X: Kernel = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
pub const K_Y: Kernel = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
pub const K_LAP: Kernel = [[1.0, 2.0, 1.0], [2.0, -12.0, 2.0], [1.0, 2.0, 1.0]];
pub const K_LAP_X: Kernel = [[0.5, 0.0, 0.5], [2.0, -6.0, 2.0], [0.5, 0.0, 0.5]];
pub const K_LAP_Y: Kernel = [[0.5, 2.0, 0.5], [0.0, -6.0, 0.0], [0.5, 2.0, 0.5]];

/// The fixed stencils plus the normalization and boundary mode a rule was
/// trained with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterBank {
    pub padding: Padding,
    pub sobel_divisor: f32,
    pub laplacian_divisor: f32,
}

impl FilterBank {
    pub const K_ID: Kernel = K_ID;
    pub const K_X: Kernel = K_X;
    pub const K_Y: Kernel = K_Y;
    pub const K_LAP: Kernel = K_LAP;
    pub const K_LAP_X: Kernel = K_LAP_X;
    pub const K_LAP_Y: Kernel = K_LAP_Y;

    pub fn for_rule(weights: &RuleWeights) -> Self {
        Self {
            padding: weights.padding,
            sobel_divisor: weights.sobel_divisor,
            laplacian_divisor: weights.laplacian_divisor,
        }
    }
}

/// Which block of the perception vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Identity = 0,
    GradX = 1,
    GradY = 2,
    Laplacian = 3,
}

/// `H×W×(4C + p)` perception vectors: `[identity, ∇x, ∇y, ∇²]` blocks of
/// `C` values each, then `(x/H, y/W)` for positional-encoding rules.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionField {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub inputs: usize,
    pub data: Vec<f32>,
}

impl PerceptionField {
    pub fn cell(&self, x: usize, y: usize) -> &[f32] {
        let start = (y * self.width + x) * self.inputs;
        &self.data[start..start + self.inputs]
    }

    pub fn cell_mut(&mut self, x: usize, y: usize) -> &mut [f32] {
        let start = (y * self.width + x) * self.inputs;
        &mut self.data[start..start + self.inputs]
    }

    pub fn get(&self, block: Block, x: usize, y: usize, channel: usize) -> f32 {
        self.cell(x, y)[block as usize * self.channels + channel]
    }

    /// Positional inputs `(x/H, y/W)` of a cell, if present.
    pub fn coords(&self, x: usize, y: usize) -> Option<[f32; 2]> {
        let cell = self.cell(x, y);
        (self.inputs == 4 * self.channels + 2).then(|| [cell[4 * self.channels], cell[4 * self.channels + 1]])
    }
}

/// Neighbor offsets for one axis.
#[inline]
fn neighbors(i: usize, n: usize, padding: Padding) -> (usize, usize) {
    match padding {
        Padding::Circular => ((i + n - 1) % n, (i + 1) % n),
        Padding::Replicate => (i.saturating_sub(1), (i + 1).min(n - 1)),
    }
}

/// Per-call constants shared by all rows.
pub(crate) struct PerceiveParams<'a> {
    pub bank: FilterBank,
    pub positional: bool,
    pub dx: &'a CellSize,
    pub dy: &'a CellSize,
    /// Global multiplier on both cell-size fields.
    pub multiplier: f32,
}

impl PerceiveParams<'_> {
    pub fn inputs(&self, channels: usize) -> usize {
        4 * channels + if self.positional { 2 } else { 0 }
    }
}

/// Writes the perception vectors of row `y` into `out` (`W × inputs`).
pub(crate) fn perceive_row(grid: &CellGrid, params: &PerceiveParams<'_>, y: usize, out: &mut [f32]) {
    let h = grid.height();
    let w = grid.width();
    let ch = grid.channels();
    let inputs = params.inputs(ch);
    let data = grid.data();
    let (ym, yp) = neighbors(y, h, params.bank.padding);
    let sobel = f64::from(params.bank.sobel_divisor);
    let lap = f64::from(params.bank.laplacian_divisor);
    let mult = f64::from(params.multiplier);
    let row = |yy: usize| &data[yy * w * ch..(yy + 1) * w * ch];
    let (top, mid, bot) = (row(ym), row(y), row(yp));

    for x in 0..w {
        let (xm, xp) = neighbors(x, w, params.bank.padding);
        let hx = f64::from(params.dx.at(x, y)) * mult;
        let hy = f64::from(params.dy.at(x, y)) * mult;
        let gx_den = sobel * hx;
        let gy_den = sobel * hy;
        let lx_den = lap * (hx * hx);
        let ly_den = lap * (hy * hy);
        let cell = &mut out[x * inputs..(x + 1) * inputs];
        for c in 0..ch {
            let at = |r: &[f32], xx: usize| f64::from(r[xx * ch + c]);
            let (a, b, cc) = (at(top, xm), at(top, x), at(top, xp));
            let (d, e, f) = (at(mid, xm), at(mid, x), at(mid, xp));
            let (g, hh, i) = (at(bot, xm), at(bot, x), at(bot, xp));
            let gx = (cc + 2.0 * f + i) - (a + 2.0 * d + g);
            let gy = (g + 2.0 * hh + i) - (a + 2.0 * b + cc);
            let corners = 0.5 * (a + cc + g + i);
            let lx = corners + 2.0 * (d + f) - 6.0 * e;
            let ly = corners + 2.0 * (b + hh) - 6.0 * e;
            cell[c] = e as f32;
            cell[ch + c] = (gx / gx_den) as f32;
            cell[2 * ch + c] = (gy / gy_den) as f32;
            cell[3 * ch + c] = (lx / lx_den + ly / ly_den) as f32;
        }
        if params.positional {
            cell[4 * ch] = (x as f64 / h as f64) as f32;
            cell[4 * ch + 1] = (y as f64 / w as f64) as f32;
        }
    }
}

pub(crate) fn check_inputs(grid: &CellGrid, weights: &RuleWeights, disc: &Discretization) -> Result<()> {
    if grid.channels() != weights.channels {
        return Err(Error::DimensionMismatch {
            what: "grid channels vs rule channels",
            expected: weights.channels,
            actual: grid.channels(),
        });
    }
    disc.validate()?;
    disc.check_shape(grid.height(), grid.width())
}

/// Perception field of `grid` under `disc`, with the cell-size multiplier
/// evaluated at `grid.time()`.
pub fn perceive(grid: &CellGrid, weights: &RuleWeights, disc: &Discretization) -> Result<PerceptionField> {
    check_inputs(grid, weights, disc)?;
    Ok(perceive_with(grid, weights, disc, disc.scale_at(grid.time())))
}

pub(crate) fn perceive_with(
    grid: &CellGrid,
    weights: &RuleWeights,
    disc: &Discretization,
    multiplier: f32,
) -> PerceptionField {
    let params = PerceiveParams {
        bank: FilterBank::for_rule(weights),
        positional: weights.variant == Variant::Pe,
        dx: &disc.dx,
        dy: &disc.dy,
        multiplier,
    };
    let inputs = params.inputs(grid.channels());
    let mut data = vec![0.0f32; grid.height() * grid.width() * inputs];
    par::for_each_row(&mut data, grid.width() * inputs, |y, row| {
        perceive_row(grid, &params, y, row)
    });
    PerceptionField {
        height: grid.height(),
        width: grid.width(),
        channels: grid.channels(),
        inputs,
        data,
    }
}
