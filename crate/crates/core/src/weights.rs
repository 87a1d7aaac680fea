//! The learned update rule: two dense layers plus the perception settings
//! the rule was trained with.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::rng::CounterRng;
use crate::{Error, Result};

/// Default state width.
pub const DEFAULT_CHANNELS: usize = 12;
/// Default hidden width.
pub const DEFAULT_HIDDEN: usize = 96;
/// Unit-ramp response of the Sobel stencil.
pub const DEFAULT_SOBEL_DIVISOR: f32 = 8.0;
/// Response of the nine-point Laplacian stencil to `x²` is `2 · 4`.
pub const DEFAULT_LAPLACIAN_DIVISOR: f32 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Zero seed, stochastic update mask, circular padding.
    Vanilla,
    /// Vanilla plus normalized cell coordinates in the perception vector;
    /// replicate padding.
    Pe,
    /// Uniform-noise seed, deterministic update, circular padding.
    Noise,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Vanilla => "vanilla",
            Variant::Pe => "pe",
            Variant::Noise => "noise",
        }
    }

    /// Extra perception inputs appended after the four stencil blocks.
    pub fn positional_inputs(self) -> usize {
        if self == Variant::Pe {
            2
        } else {
            0
        }
    }

    pub fn padding(self) -> Padding {
        if self == Variant::Pe {
            Padding::Replicate
        } else {
            Padding::Circular
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Variant::Vanilla => 0,
            Variant::Pe => 1,
            Variant::Noise => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Variant::Vanilla),
            1 => Some(Variant::Pe),
            2 => Some(Variant::Noise),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vanilla" => Ok(Variant::Vanilla),
            "pe" => Ok(Variant::Pe),
            "noise" => Ok(Variant::Noise),
            _ => Err(Error::InvalidParameter("variant must be vanilla, pe or noise")),
        }
    }
}

/// Boundary handling for the 3×3 stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Padding {
    Circular,
    Replicate,
}

impl Padding {
    pub fn name(self) -> &'static str {
        match self {
            Padding::Circular => "circular",
            Padding::Replicate => "replicate",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Padding::Circular => 0,
            Padding::Replicate => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Padding::Circular),
            1 => Some(Padding::Replicate),
            _ => None,
        }
    }
}

/// Parameters of the update rule `ΔS = W2 · relu(W1 · z + b1)`.
///
/// `w1` is row-major `D × (4C + p)` with input columns ordered as the
/// perception blocks `[identity, ∇x, ∇y, ∇², coords]`; `w2` is row-major
/// `C × D`.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleWeights {
    pub channels: usize,
    pub hidden: usize,
    pub w1: Vec<f32>,
    pub b1: Vec<f32>,
    pub w2: Vec<f32>,
    pub variant: Variant,
    pub padding: Padding,
    pub sobel_divisor: f32,
    pub laplacian_divisor: f32,
}

impl RuleWeights {
    /// All-zero rule: `ΔS ≡ 0`.
    pub fn zeros(channels: usize, hidden: usize, variant: Variant) -> Self {
        let inputs = 4 * channels + variant.positional_inputs();
        Self {
            channels,
            hidden,
            w1: vec![0.0; hidden * inputs],
            b1: vec![0.0; hidden],
            w2: vec![0.0; channels * hidden],
            variant,
            padding: variant.padding(),
            sobel_divisor: DEFAULT_SOBEL_DIVISOR,
            laplacian_divisor: DEFAULT_LAPLACIAN_DIVISOR,
        }
    }

    /// Random rule with entries drawn uniformly from `±scale / sqrt(fan_in)`.
    /// Deterministic in `seed`.
    pub fn random(channels: usize, hidden: usize, variant: Variant, seed: u64, scale: f32) -> Self {
        let mut w = Self::zeros(channels, hidden, variant);
        let mut rng = CounterRng::new(seed);
        let in_bound = scale / libm::sqrtf(w.inputs() as f32);
        let hid_bound = scale / libm::sqrtf(hidden as f32);
        for v in &mut w.w1 {
            *v = rng.symmetric(in_bound);
        }
        for v in &mut w.b1 {
            *v = rng.symmetric(in_bound);
        }
        for v in &mut w.w2 {
            *v = rng.symmetric(hid_bound);
        }
        w
    }

    /// Width of the perception vector this rule consumes.
    pub fn inputs(&self) -> usize {
        4 * self.channels + self.variant.positional_inputs()
    }

    #[inline]
    pub fn w1_at(&self, row: usize, col: usize) -> f32 {
        self.w1[row * self.inputs() + col]
    }

    #[inline]
    pub fn w2_at(&self, row: usize, col: usize) -> f32 {
        self.w2[row * self.hidden + col]
    }

    /// Checks every structural invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.channels < 3 {
            return Err(Error::InvalidParameter("rule needs at least 3 state channels"));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidParameter("hidden width must be positive"));
        }
        let checks: [(&'static str, usize, usize); 3] = [
            ("w1", self.hidden * self.inputs(), self.w1.len()),
            ("b1", self.hidden, self.b1.len()),
            ("w2", self.channels * self.hidden, self.w2.len()),
        ];
        for (what, expected, actual) in checks {
            if expected != actual {
                return Err(Error::DimensionMismatch { what, expected, actual });
            }
        }
        for (what, values) in [("w1", &self.w1), ("b1", &self.b1), ("w2", &self.w2)] {
            if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { what, index });
            }
        }
        if self.padding != self.variant.padding() {
            return Err(Error::PaddingMismatch {
                variant: self.variant.name(),
                expected: self.variant.padding().name(),
            });
        }
        for (what, value) in [
            ("sobel_divisor", self.sobel_divisor),
            ("laplacian_divisor", self.laplacian_divisor),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositive {
                    what,
                    value: f64::from(value),
                });
            }
        }
        Ok(())
    }

    /// Re-labels the rule as another variant, resizing `w1` when the
    /// positional inputs appear or disappear (new columns are zero).
    pub fn with_variant(&self, variant: Variant) -> Self {
        let old_inputs = self.inputs();
        let mut out = self.clone();
        out.variant = variant;
        out.padding = variant.padding();
        let new_inputs = out.inputs();
        if new_inputs != old_inputs {
            let keep = old_inputs.min(new_inputs);
            let mut w1 = vec![0.0; self.hidden * new_inputs];
            for r in 0..self.hidden {
                w1[r * new_inputs..r * new_inputs + keep]
                    .copy_from_slice(&self.w1[r * old_inputs..r * old_inputs + keep]);
            }
            out.w1 = w1;
        }
        out
    }
}
