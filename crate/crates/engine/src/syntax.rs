//! Small text languages used on the command line and in the service
//! protocol.
//!
//! Numbers are decimal floats (`0.25`, `1e-3`) or powers of two (`2^-4`,
//! `2^0.5`).
//!
//! Value lists (`--values`) take one of:
//! - `a..b:Nlog`: `N` log-uniform samples from `a` to `b` inclusive,
//! - `a..b:Nlin`: `N` evenly spaced samples,
//! - `v1,v2,…`: an explicit list.
//!
//! Cell-size profiles (`--dx-profile`) are `exp:a..b:symmetric` or
//! `exp:a..b:ramp`. A symmetric profile has cell size `a` at the left and
//! right borders and `b` at the center, interpolated geometrically in the
//! distance to the center; a ramp goes from `a` at the left border to `b` at
//! the right one. `lin:` instead of `exp:` interpolates arithmetically.
//!
//! Scale keyframes (`--scale-keyframes`) are `t0:m0,t1:m1,…`.

use nca_core::analysis::log_spaced;
use nca_core::discretization::{CellSize, ScaleKeyframes};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("cannot parse {what} {input:?}: {reason}")]
pub struct SyntaxError {
    pub what: &'static str,
    pub input: String,
    pub reason: &'static str,
}

fn fail<T>(what: &'static str, input: &str, reason: &'static str) -> Result<T, SyntaxError> {
    Err(SyntaxError {
        what,
        input: input.to_string(),
        reason,
    })
}

pub fn parse_number(s: &str) -> Result<f64, SyntaxError> {
    let t = s.trim();
    let v = match t.split_once('^') {
        Some((base, exp)) => {
            let base: f64 = base.trim().parse().or_else(|_| fail("number", s, "bad base"))?;
            let exp: f64 = exp.trim().parse().or_else(|_| fail("number", s, "bad exponent"))?;
            base.powf(exp)
        }
        None => t.parse().or_else(|_| fail("number", s, "not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        fail("number", s, "not finite")
    }
}

fn parse_span(s: &str, what: &'static str) -> Result<(f64, f64), SyntaxError> {
    let Some((a, b)) = s.split_once("..") else {
        return fail(what, s, "expected a..b");
    };
    Ok((parse_number(a)?, parse_number(b)?))
}

pub fn parse_values(s: &str) -> Result<Vec<f64>, SyntaxError> {
    const WHAT: &str = "value range";
    let t = s.trim();
    if !t.contains("..") {
        return t.split(',').map(parse_number).collect();
    }
    let Some((span, count)) = t.rsplit_once(':') else {
        return fail(WHAT, s, "expected a..b:Nlog");
    };
    let (lo, hi) = parse_span(span, WHAT)?;
    let (digits, log) = if let Some(d) = count.strip_suffix("log") {
        (d, true)
    } else if let Some(d) = count.strip_suffix("lin") {
        (d, false)
    } else {
        return fail(WHAT, s, "count must end in log or lin");
    };
    let n: usize = digits.trim().parse().or_else(|_| fail(WHAT, s, "bad sample count"))?;
    if n == 0 {
        return fail(WHAT, s, "sample count must be positive");
    }
    if log {
        if !(lo > 0.0 && hi > 0.0) {
            return fail(WHAT, s, "log ranges need positive endpoints");
        }
        Ok(log_spaced(lo, hi, n))
    } else if n == 1 {
        Ok(vec![lo])
    } else {
        Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileShape {
    /// `a` at both borders, `b` at the center.
    Symmetric,
    /// `a` at the left border, `b` at the right.
    Ramp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellProfile {
    pub geometric: bool,
    pub from: f64,
    pub to: f64,
    pub shape: ProfileShape,
}

impl CellProfile {
    /// Cell size at column `x` of a `width`-wide grid.
    pub fn at(&self, x: usize, width: usize) -> f64 {
        let u = if width <= 1 { 0.0 } else { x as f64 / (width - 1) as f64 };
        let s = match self.shape {
            ProfileShape::Ramp => u,
            ProfileShape::Symmetric => 1.0 - (2.0 * u - 1.0).abs(),
        };
        if self.geometric {
            self.from * (self.to / self.from).powf(s)
        } else {
            self.from + (self.to - self.from) * s
        }
    }

    /// Column-dependent cell-size field for an `height × width` grid.
    pub fn field(&self, height: usize, width: usize) -> nca_core::Result<CellSize> {
        CellSize::from_fn(height, width, |x, _| self.at(x, width) as f32)
    }
}

pub fn parse_profile(s: &str) -> Result<CellProfile, SyntaxError> {
    const WHAT: &str = "cell-size profile";
    let parts: Vec<&str> = s.trim().split(':').collect();
    let [kind, span, shape] = parts[..] else {
        return fail(WHAT, s, "expected kind:a..b:shape");
    };
    let geometric = match kind {
        "exp" => true,
        "lin" => false,
        _ => return fail(WHAT, s, "kind must be exp or lin"),
    };
    let shape = match shape {
        "symmetric" => ProfileShape::Symmetric,
        "ramp" => ProfileShape::Ramp,
        _ => return fail(WHAT, s, "shape must be symmetric or ramp"),
    };
    let (from, to) = parse_span(span, WHAT)?;
    if !(from > 0.0 && to > 0.0) {
        return fail(WHAT, s, "cell sizes must be positive");
    }
    Ok(CellProfile {
        geometric,
        from,
        to,
        shape,
    })
}

pub fn parse_keyframes(s: &str) -> Result<ScaleKeyframes, SyntaxError> {
    const WHAT: &str = "scale keyframes";
    let mut frames = Vec::new();
    for item in s.split(',') {
        let Some((t, m)) = item.split_once(':') else {
            return fail(WHAT, s, "expected t:m pairs");
        };
        frames.push((parse_number(t)?, parse_number(m)? as f32));
    }
    ScaleKeyframes::new(frames).or_else(|_| fail(WHAT, s, "times must be finite and multipliers positive"))
}

/// `HxW`, e.g. `128x128`.
pub fn parse_size(s: &str) -> Result<(usize, usize), SyntaxError> {
    let Some((h, w)) = s.trim().split_once(['x', 'X']) else {
        return fail("size", s, "expected HxW");
    };
    match (h.trim().parse(), w.trim().parse()) {
        (Ok(h), Ok(w)) => Ok((h, w)),
        _ => fail("size", s, "expected HxW"),
    }
}
