//! The simulated state field and its RGB view.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Height, width and channel count of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl GridShape {
    pub fn new(height: usize, width: usize, channels: usize) -> Result<Self> {
        let shape = Self {
            height,
            width,
            channels,
        };
        shape.check()?;
        Ok(shape)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.height < 3 || self.width < 3 || self.channels < 3 {
            return Err(Error::InvalidShape {
                height: self.height,
                width: self.width,
                channels: self.channels,
            });
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.height * self.width
    }

    pub fn len(&self) -> usize {
        self.cells() * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// State field `S(x, y, t)`: `H·W·C` values in row-major `(y, x, channel)`
/// order plus the current simulation time in PDE units.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    shape: GridShape,
    data: Vec<f32>,
    time: f64,
}

impl CellGrid {
    pub fn zeros(shape: GridShape) -> Result<Self> {
        shape.check()?;
        Ok(Self {
            shape,
            data: vec![0.0; shape.len()],
            time: 0.0,
        })
    }

    pub fn from_vec(shape: GridShape, data: Vec<f32>, time: f64) -> Result<Self> {
        shape.check()?;
        if data.len() != shape.len() {
            return Err(Error::DimensionMismatch {
                what: "grid data",
                expected: shape.len(),
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "grid data",
                index,
            });
        }
        if !time.is_finite() {
            return Err(Error::InvalidParameter("grid time must be finite"));
        }
        Ok(Self { shape, data, time })
    }

    /// Builds a grid by evaluating `f(x, y, channel)` at every entry.
    pub fn from_fn(shape: GridShape, mut f: impl FnMut(usize, usize, usize) -> f32) -> Result<Self> {
        shape.check()?;
        let mut data = Vec::with_capacity(shape.len());
        for y in 0..shape.height {
            for x in 0..shape.width {
                for c in 0..shape.channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::from_vec(shape, data, 0.0)
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn height(&self) -> usize {
        self.shape.height
    }

    pub fn width(&self) -> usize {
        self.shape.width
    }

    pub fn channels(&self) -> usize {
        self.shape.channels
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Mutable access to the raw values. Callers are responsible for keeping
    /// them finite.
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, channel: usize) -> usize {
        (y * self.shape.width + x) * self.shape.channels + channel
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, channel: usize) -> f32 {
        self.data[self.index(x, y, channel)]
    }

    pub fn cell(&self, x: usize, y: usize) -> &[f32] {
        let start = self.index(x, y, 0);
        &self.data[start..start + self.shape.channels]
    }

    pub fn cell_mut(&mut self, x: usize, y: usize) -> &mut [f32] {
        let start = self.index(x, y, 0);
        let c = self.shape.channels;
        &mut self.data[start..start + c]
    }

    /// Cyclic translation: the value at `(x, y)` moves to
    /// `((x + dx) mod W, (y + dy) mod H)`.
    pub fn shifted(&self, dx: usize, dy: usize) -> Self {
        let GridShape {
            height,
            width,
            channels,
        } = self.shape;
        let mut data = vec![0.0; self.data.len()];
        for y in 0..height {
            for x in 0..width {
                let src = self.index(x, y, 0);
                let dst = (((y + dy) % height) * width + (x + dx) % width) * channels;
                data[dst..dst + channels].copy_from_slice(&self.data[src..src + channels]);
            }
        }
        Self {
            shape: self.shape,
            data,
            time: self.time,
        }
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.data.iter().position(|v| !v.is_finite())
    }

    /// Root mean square over all cells and channels, accumulated in `f64`.
    pub fn rms(&self) -> f64 {
        rms(&self.data)
    }
}

pub(crate) fn rms(values: &[f32]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|&v| f64::from(v) * f64::from(v)).sum();
    libm::sqrt(sum / values.len() as f64)
}

/// An `H×W×3` RGB image with values in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl Image {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != height * width * 3 {
            return Err(Error::DimensionMismatch {
                what: "image data",
                expected: height * width * 3,
                actual: data.len(),
            });
        }
        Ok(Self { height, width, data })
    }

    pub fn filled(height: usize, width: usize, rgb: [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(height * width * 3);
        for _ in 0..height * width {
            data.extend_from_slice(&rgb);
        }
        Self { height, width, data }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Cyclic translation, same convention as [`CellGrid::shifted`].
    pub fn shifted(&self, dx: usize, dy: usize) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                let src = (y * self.width + x) * 3;
                let dst = (((y + dy) % self.height) * self.width + (x + dx) % self.width) * 3;
                data[dst..dst + 3].copy_from_slice(&self.data[src..src + 3]);
            }
        }
        Self {
            height: self.height,
            width: self.width,
            data,
        }
    }
}

/// The visible texture: channels 0..3 clamped to `[0, 1]`.
pub fn rgb_of(grid: &CellGrid) -> Image {
    let c = grid.channels();
    let data = grid
        .data()
        .chunks_exact(c)
        .flat_map(|cell| cell[..3].iter().map(|v| v.clamp(0.0, 1.0)))
        .collect();
    Image {
        height: grid.height(),
        width: grid.width(),
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(h: usize, w: usize, c: usize) -> GridShape {
        GridShape::new(h, w, c).unwrap()
    }

    #[test]
    fn rejects_small_shapes() {
        assert!(GridShape::new(2, 8, 12).is_err());
        assert!(GridShape::new(8, 8, 2).is_err());
        assert!(GridShape::new(3, 3, 3).is_ok());
    }

    #[test]
    fn rgb_of_zero_grid_is_black() {
        let img = rgb_of(&CellGrid::zeros(shape(4, 5, 12)).unwrap());
        assert_eq!(img.data.len(), 4 * 5 * 3);
        assert!(img.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rgb_of_clamps_upper_bound() {
        let g = CellGrid::from_fn(shape(4, 4, 4), |_, _, c| if c == 0 { 2.0 } else { 0.0 }).unwrap();
        let img = rgb_of(&g);
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(img.pixel(x, y), [1.0, 0.0, 0.0]);
            }
        }
    }

    #[test]
    fn rgb_of_projects_first_three_channels() {
        let vals = [0.2, 0.5, 0.9, -3.0, 7.0, 1.5];
        let g = CellGrid::from_fn(shape(3, 3, 6), |_, _, c| vals[c]).unwrap();
        let img = rgb_of(&g);
        assert_eq!(img.pixel(1, 2), [0.2, 0.5, 0.9]);
    }

    #[test]
    fn rgb_of_is_identity_on_in_range_values() {
        let g = CellGrid::from_fn(shape(5, 4, 3), |x, y, c| ((x + 2 * y + 3 * c) % 7) as f32 / 6.0).unwrap();
        assert_eq!(rgb_of(&g).data, g.data());
    }

    #[test]
    fn from_vec_rejects_nan_and_bad_length() {
        let s = shape(3, 3, 3);
        assert!(matches!(
            CellGrid::from_vec(s, vec![0.0; 26], 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut d = vec![0.0; 27];
        d[5] = f32::NAN;
        assert_eq!(
            CellGrid::from_vec(s, d, 0.0),
            Err(Error::NonFinite {
                what: "grid data",
                index: 5
            })
        );
    }

    #[test]
    fn shift_wraps_around() {
        let g = CellGrid::from_fn(shape(3, 4, 3), |x, y, c| (x * 100 + y * 10 + c) as f32).unwrap();
        let s = g.shifted(1, 2);
        assert_eq!(s.get(0, 1, 2), g.get(3, 2, 2));
        assert_eq!(s.get(2, 0, 0), g.get(1, 1, 0));
    }
}
