//! Quiescent uniform states.
//!
//! In a uniform state every stencil except the identity returns zero, so the
//! perception vector collapses to `[S, 0, 0, 0]` and the residual becomes
//! `W2 · relu(W1_id · S + b1)`, where `W1_id` is the first `C` columns of
//! `W1`. The solver minimizes the L1 norm of that residual over `S ∈ R^C`
//! with subgradient descent: each iteration tries `S - η g` and halves `η`
//! until the objective strictly decreases. The search starts from twice the
//! last accepted step, capped at the initial step size.
//!
//! Near a solution some residual components are tiny but nonzero, and their
//! `±1` signs swamp the subgradient: every step then trades progress on the
//! large components against overshoot on the small ones and the iterates
//! stall. Each iteration therefore also tries the direction in which
//! components below `1e-3` of the largest count as sitting on their kink,
//! and keeps whichever search lowers the objective more. The objective is
//! convex, so any minimum found is global.

use alloc::vec;
use alloc::vec::Vec;

use crate::weights::{RuleWeights, Variant};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    /// Converged once the objective is at or below this value.
    pub tol: f64,
    pub max_iters: usize,
    /// Initial step size.
    pub step: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 10_000,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    /// Best state found.
    pub state: Vec<f64>,
    /// `‖ΔS‖₁` at `state`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each iteration, starting with the initial point.
    pub history: Vec<f64>,
}

/// Uniform-state residual `ΔS(S)` and the L1 objective, evaluated in `f64`.
#[derive(Debug, Clone)]
pub struct UniformResidual<'a> {
    weights: &'a RuleWeights,
}

impl<'a> UniformResidual<'a> {
    pub fn new(weights: &'a RuleWeights) -> Self {
        Self { weights }
    }

    fn hidden_pre(&self, state: &[f64]) -> Vec<f64> {
        let w = self.weights;
        (0..w.hidden)
            .map(|d| {
                let mut s = f64::from(w.b1[d]);
                for (c, &v) in state.iter().enumerate() {
                    s += f64::from(w.w1_at(d, c)) * v;
                }
                s
            })
            .collect()
    }

    pub fn residual(&self, state: &[f64]) -> Vec<f64> {
        let w = self.weights;
        let pre = self.hidden_pre(state);
        (0..w.channels)
            .map(|c| {
                pre.iter()
                    .enumerate()
                    .map(|(d, &p)| f64::from(w.w2_at(c, d)) * p.max(0.0))
                    .sum()
            })
            .collect()
    }

    pub fn objective(&self, state: &[f64]) -> f64 {
        self.residual(state).iter().map(|v| v.abs()).sum()
    }

    /// A subgradient of the objective; `sign(0)` and `relu'(0)` are 0.
    pub fn subgradient(&self, state: &[f64]) -> Vec<f64> {
        self.subgradient_with_deadzone(state, 0.0)
    }

    /// Like [`subgradient`](Self::subgradient), but residual components with
    /// magnitude at or below `deadzone` are treated as sitting on their kink
    /// (sign 0).
    pub fn subgradient_with_deadzone(&self, state: &[f64], deadzone: f64) -> Vec<f64> {
        let w = self.weights;
        let pre = self.hidden_pre(state);
        let out = self.residual(state);
        let sign = |v: f64| {
            if v.abs() <= deadzone {
                0.0
            } else if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            }
        };
        let mut grad = vec![0.0; w.channels];
        for (d, &p) in pre.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let back: f64 = out
                .iter()
                .enumerate()
                .map(|(c, &o)| sign(o) * f64::from(w.w2_at(c, d)))
                .sum();
            if back == 0.0 {
                continue;
            }
            for (g, col) in grad.iter_mut().zip(0..w.channels) {
                *g += back * f64::from(w.w1_at(d, col));
            }
        }
        grad
    }
}

/// Residual components below this fraction of the largest one are treated
/// as zero when building the alternative search direction.
const KINK_FRACTION: f64 = 1e-3;

/// Halves `step` from its start value until `S - η g` strictly improves on
/// `objective`; returns the new value, point and step.
fn line_search(
    f: &UniformResidual<'_>,
    state: &[f64],
    objective: f64,
    grad: &[f64],
    mut step: f64,
) -> Option<(f64, Vec<f64>, f64)> {
    let norm = libm::sqrt(grad.iter().map(|g| g * g).sum::<f64>());
    if norm == 0.0 {
        return None;
    }
    let scale = state.iter().map(|v| v.abs()).fold(1.0, f64::max);
    while step * norm > f64::EPSILON * scale {
        let trial: Vec<f64> = state.iter().zip(grad).map(|(s, g)| s - step * g).collect();
        let value = f.objective(&trial);
        if value < objective {
            return Some((value, trial, step));
        }
        step *= 0.5;
    }
    None
}

/// Minimizes `‖W2 · relu(W1_id · S + b1)‖₁` starting from `init`.
///
/// Returns the best iterate; `converged` is set only when its objective is
/// within `tol`. Positional-encoding rules are rejected since a uniform state
/// cannot exist when cells see their own coordinates.
pub fn find_fixed_point(weights: &RuleWeights, init: &[f64], options: FixedPointOptions) -> Result<FixedPointResult> {
    weights.validate()?;
    if weights.variant == Variant::Pe {
        return Err(Error::PositionalFixedPoint);
    }
    if init.len() != weights.channels {
        return Err(Error::DimensionMismatch {
            what: "initial state",
            expected: weights.channels,
            actual: init.len(),
        });
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("initial state must be finite"));
    }
    if !(options.step > 0.0 && options.tol >= 0.0) {
        return Err(Error::InvalidParameter("step must be positive and tol non-negative"));
    }
    let f = UniformResidual::new(weights);
    let mut state = init.to_vec();
    let mut objective = f.objective(&state);
    let mut history = vec![objective];
    let mut iterations = 0;
    let mut last_step = options.step;
    while iterations < options.max_iters && objective > options.tol {
        iterations += 1;
        let largest = f.residual(&state).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let plain = f.subgradient(&state);
        let kinked = f.subgradient_with_deadzone(&state, KINK_FRACTION * largest);
        let start = (2.0 * last_step).min(options.step);
        let mut best = line_search(&f, &state, objective, &kinked, start);
        if kinked != plain {
            if let Some(other) = line_search(&f, &state, objective, &plain, start) {
                if best.as_ref().is_none_or(|b| other.0 < b.0) {
                    best = Some(other);
                }
            }
        }
        match best {
            Some((value, trial, step)) => {
                state = trial;
                objective = value;
                last_step = step;
                history.push(objective);
            }
            None => {
                history.push(objective);
                break;
            }
        }
    }
    Ok(FixedPointResult {
        converged: objective <= options.tol,
        state,
        objective,
        iterations,
        history,
    })
}
