//! Appearance proxy: Gram-matrix statistics of a fixed random convolutional
//! feature stack, plus bilinear resampling.
//!
//! The stack has three 3×3 stride-2 convolutions (3 → 16 → 32 → 64 channels)
//! with circular padding and rectified outputs. Weights are drawn once from
//! seed 0, uniform in `±sqrt(6 / fan_in)`, so scores are comparable across
//! machines and runs.
//!
//! A strided stack only sees one of its `2^l` sampling phases per layer,
//! which makes pooled statistics depend on where the texture happens to sit.
//! Features are therefore evaluated at every phase at once: layer `l` runs
//! densely with its taps dilated by `2^l`, which yields exactly the union of
//! all phase-shifted strided outputs. Each layer contributes its channel
//! Gram matrix normalized by the number of positions; the distance between
//! two images is the Euclidean distance between the concatenated Gram
//! matrices, and it is invariant to cyclic shifts.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::Image;
use crate::rng::CounterRng;
use crate::{par, Error, Result};

const LAYER_WIDTHS: [usize; 4] = [3, 16, 32, 64];
const FEATURE_SEED: u64 = 0;

struct Conv {
    /// Tap spacing of the dense (all-phase) evaluation.
    dilation: usize,
    cin: usize,
    cout: usize,
    /// `(3·3·cin) × cout`, taps ordered `(ky, kx, cin)`.
    weights: Vec<f32>,
}

fn feature_stack() -> Vec<Conv> {
    let mut rng = CounterRng::new(FEATURE_SEED);
    LAYER_WIDTHS
        .windows(2)
        .enumerate()
        .map(|(layer, pair)| {
            let (cin, cout) = (pair[0], pair[1]);
            let fan_in = 9 * cin;
            let bound = libm::sqrtf(6.0 / fan_in as f32);
            // drawn output-major, stored tap-major
            let drawn: Vec<f32> = (0..cout * fan_in).map(|_| rng.symmetric(bound)).collect();
            let mut weights = vec![0.0; fan_in * cout];
            for o in 0..cout {
                for t in 0..fan_in {
                    weights[t * cout + o] = drawn[o * fan_in + t];
                }
            }
            Conv {
                dilation: 1 << layer,
                cin,
                cout,
                weights,
            }
        })
        .collect()
}

/// Feature map `h × w × c`, row-major.
struct Features {
    h: usize,
    w: usize,
    c: usize,
    data: Vec<f32>,
}

impl Conv {
    fn apply(&self, input: &Features) -> Features {
        let (h, w, d) = (input.h, input.w, self.dilation);
        let mut data = vec![0.0f32; h * w * self.cout];
        par::for_each_row(&mut data, w * self.cout, |oy, row| {
            let mut patch = vec![0.0f32; 9 * self.cin];
            for ox in 0..w {
                for ky in 0..3 {
                    let y = (oy + ky * d + h * d - d) % h;
                    for kx in 0..3 {
                        let x = (ox + kx * d + w * d - d) % w;
                        let src = (y * w + x) * input.c;
                        let dst = (ky * 3 + kx) * self.cin;
                        patch[dst..dst + self.cin].copy_from_slice(&input.data[src..src + self.cin]);
                    }
                }
                let out = &mut row[ox * self.cout..(ox + 1) * self.cout];
                for (&p, taps) in patch.iter().zip(self.weights.chunks_exact(self.cout)) {
                    for (o, &w) in out.iter_mut().zip(taps) {
                        *o += w * p;
                    }
                }
                for o in out.iter_mut() {
                    *o = o.max(0.0);
                }
            }
        });
        Features {
            h,
            w,
            c: self.cout,
            data,
        }
    }

    fn gram(f: &Features) -> Vec<f64> {
        let n = (f.h * f.w) as f64;
        let mut g = vec![0.0f64; f.c * f.c];
        for cell in f.data.chunks_exact(f.c) {
            for i in 0..f.c {
                let a = f64::from(cell[i]);
                if a == 0.0 {
                    continue;
                }
                for j in i..f.c {
                    g[i * f.c + j] += a * f64::from(cell[j]);
                }
            }
        }
        for i in 0..f.c {
            for j in i..f.c {
                let v = g[i * f.c + j] / n;
                g[i * f.c + j] = v;
                g[j * f.c + i] = v;
            }
        }
        g
    }
}

/// Concatenated per-layer Gram matrices of an image.
#[derive(Debug, Clone, PartialEq)]
pub struct GramEmbedding(pub Vec<f64>);

impl GramEmbedding {
    pub fn of(img: &Image) -> Self {
        let mut f = Features {
            h: img.height,
            w: img.width,
            c: 3,
            data: img.data.clone(),
        };
        let mut out = Vec::new();
        for conv in feature_stack() {
            f = conv.apply(&f);
            out.extend(Conv::gram(&f));
        }
        GramEmbedding(out)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let s: f64 = self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum();
        libm::sqrt(s)
    }
}

/// Gram-statistics distance between two same-shape RGB images.
pub fn texture_distance(a: &Image, b: &Image) -> Result<f64> {
    if a.height != b.height || a.width != b.width {
        return Err(Error::DimensionMismatch {
            what: "image pixels",
            expected: a.height * a.width,
            actual: b.height * b.width,
        });
    }
    Ok(GramEmbedding::of(a).distance(&GramEmbedding::of(b)))
}

/// Bilinear resize with half-pixel centers and edge clamping (no
/// antialiasing).
pub fn resize_bilinear(img: &Image, height: usize, width: usize) -> Image {
    if img.height == height && img.width == width {
        return img.clone();
    }
    let sy = img.height as f64 / height as f64;
    let sx = img.width as f64 / width as f64;
    let axis = |o: usize, scale: f64, n: usize| {
        let src = ((o as f64 + 0.5) * scale - 0.5).max(0.0);
        let i0 = (libm::floor(src) as usize).min(n - 1);
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, src - i0 as f64)
    };
    let mut data = Vec::with_capacity(height * width * 3);
    for oy in 0..height {
        let (y0, y1, fy) = axis(oy, sy, img.height);
        for ox in 0..width {
            let (x0, x1, fx) = axis(ox, sx, img.width);
            for c in 0..3 {
                let p = |x: usize, y: usize| f64::from(img.data[(y * img.width + x) * 3 + c]);
                let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
                let bot = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
                data.push((top * (1.0 - fy) + bot * fy) as f32);
            }
        }
    }
    Image { height, width, data }
}
