//! Space-time sampling: time step plus per-cell cell sizes, optionally
//! rescaled over time.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Cell size along one axis: a scalar, or one value per cell (row-major
/// `H×W`). A scalar behaves exactly as a constant field.
#[derive(Debug, Clone, PartialEq)]
pub enum CellSize {
    Uniform(f32),
    Field {
        height: usize,
        width: usize,
        values: Vec<f32>,
    },
}

impl CellSize {
    pub fn field(height: usize, width: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::DimensionMismatch {
                what: "cell size field",
                expected: height * width,
                actual: values.len(),
            });
        }
        let size = CellSize::Field { height, width, values };
        size.validate()?;
        Ok(size)
    }

    /// Evaluates `f(x, y)` at every cell.
    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> f32) -> Result<Self> {
        let mut values = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::field(height, width, values)
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        match self {
            CellSize::Uniform(v) => *v,
            CellSize::Field { width, values, .. } => values[y * width + x],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |v: f32| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::NonPositive {
                    what: "cell size",
                    value: f64::from(v),
                })
            }
        };
        match self {
            CellSize::Uniform(v) => check(*v),
            CellSize::Field { values, .. } => values.iter().try_for_each(|&v| check(v)),
        }
    }

    /// Errors unless this is a scalar or a field of exactly `height×width`.
    pub fn check_shape(&self, height: usize, width: usize) -> Result<()> {
        match self {
            CellSize::Uniform(_) => Ok(()),
            CellSize::Field {
                height: h, width: w, ..
            } => {
                if *h == height && *w == width {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch {
                        what: "cell size field",
                        expected: height * width,
                        actual: h * w,
                    })
                }
            }
        }
    }

    pub fn min(&self) -> f32 {
        match self {
            CellSize::Uniform(v) => *v,
            CellSize::Field { values, .. } => values.iter().copied().fold(f32::INFINITY, f32::min),
        }
    }

    pub fn max(&self) -> f32 {
        match self {
            CellSize::Uniform(v) => *v,
            CellSize::Field { values, .. } => values.iter().copied().fold(0.0, f32::max),
        }
    }

    /// Multiplies every entry by `s`.
    pub fn scaled(&self, s: f32) -> Self {
        match self {
            CellSize::Uniform(v) => CellSize::Uniform(v * s),
            CellSize::Field { height, width, values } => CellSize::Field {
                height: *height,
                width: *width,
                values: values.iter().map(|v| v * s).collect(),
            },
        }
    }
}

/// Piecewise-linear multiplier `m(t)` from `(t, m)` keyframes, held constant
/// before the first and after the last keyframe.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleKeyframes {
    frames: Vec<(f64, f32)>,
}

impl ScaleKeyframes {
    pub fn new(mut frames: Vec<(f64, f32)>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidParameter("at least one scale keyframe is required"));
        }
        for &(t, m) in &frames {
            if !t.is_finite() {
                return Err(Error::InvalidParameter("keyframe times must be finite"));
            }
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::NonPositive {
                    what: "scale multiplier",
                    value: f64::from(m),
                });
            }
        }
        frames.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[(f64, f32)] {
        &self.frames
    }

    pub fn at(&self, t: f64) -> f32 {
        let frames = &self.frames;
        let (t0, m0) = frames[0];
        if t <= t0 {
            return m0;
        }
        for pair in frames.windows(2) {
            let (ta, ma) = pair[0];
            let (tb, mb) = pair[1];
            if t <= tb {
                if tb == ta {
                    return mb;
                }
                let w = (t - ta) / (tb - ta);
                return (f64::from(ma) + w * (f64::from(mb) - f64::from(ma))) as f32;
            }
        }
        frames[frames.len() - 1].1
    }

    /// Smallest multiplier reached at any time.
    pub fn min(&self) -> f32 {
        self.frames.iter().map(|f| f.1).fold(f32::INFINITY, f32::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    /// Time step in PDE units.
    pub dt: f64,
    pub dx: CellSize,
    pub dy: CellSize,
    /// Optional multiplier applied to both `dx` and `dy` as a function of
    /// simulation time.
    pub scale: Option<ScaleKeyframes>,
}

impl Default for Discretization {
    /// The training discretization: `Δt = Δx = Δy = 1`.
    fn default() -> Self {
        Self::uniform(1.0, 1.0)
    }
}

impl Discretization {
    pub fn uniform(dt: f64, cell: f32) -> Self {
        Self {
            dt,
            dx: CellSize::Uniform(cell),
            dy: CellSize::Uniform(cell),
            scale: None,
        }
    }

    pub fn anisotropic(dt: f64, dx: f32, dy: f32) -> Self {
        Self {
            dt,
            dx: CellSize::Uniform(dx),
            dy: CellSize::Uniform(dy),
            scale: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::NonPositive {
                what: "dt",
                value: self.dt,
            });
        }
        self.dx.validate()?;
        self.dy.validate()
    }

    pub fn check_shape(&self, height: usize, width: usize) -> Result<()> {
        self.dx.check_shape(height, width)?;
        self.dy.check_shape(height, width)
    }

    /// Cell-size multiplier at time `t` (1 without keyframes).
    pub fn scale_at(&self, t: f64) -> f32 {
        self.scale.as_ref().map_or(1.0, |k| k.at(t))
    }

    /// Smallest cell size over both axes, the whole grid and (when
    /// keyframed) all times.
    pub fn min_cell_size(&self) -> f32 {
        let m = self.scale.as_ref().map_or(1.0, ScaleKeyframes::min);
        self.dx.min().min(self.dy.min()) * m
    }

    /// `Δt = min(1, Δx_min²)`, the largest step the spatial sweeps use for a
    /// given resolution.
    pub fn stable_dt_for(cell: f32) -> f64 {
        let c = f64::from(cell);
        (c * c).min(1.0)
    }
}
