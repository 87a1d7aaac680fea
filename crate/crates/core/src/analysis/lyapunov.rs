//! Maximal Lyapunov exponent of a deterministic run, estimated from the
//! magnitude of the time derivative along the trajectory:
//!
//! ```text
//! λ ≈ 1/N · Σ_{j=0..n} log ‖f(S_j)‖
//! ```
//!
//! where `f(S_j)` is the residual field at the state reached after `j`
//! steps (before `Δt` scaling), `‖·‖` is the RMS over cells and channels and
//! `N = n + 1` counts every state from the seed to the final one. This is
//! not the Jacobian-based textbook estimator: it substitutes the update
//! field for the derivative of the map, which makes it cheap but means it
//! measures the log-speed of the dynamics rather than the divergence of
//! neighboring trajectories.

use crate::dynamics::{SimSpec, Simulator, StepScheduler};
use crate::{Error, Result};

/// Log value used for a state whose residual field is exactly zero:
/// `ln(f64::MIN_POSITIVE)`.
pub const LOG_FLOOR: f64 = -1022.0 * core::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleEstimate {
    pub lambda: f64,
    /// Number of states averaged (`steps + 1`).
    pub samples: u64,
    pub steps: u64,
    /// Some state had a zero residual field and contributed [`LOG_FLOOR`].
    pub degenerate: bool,
}

fn log_norm(rms: f64, degenerate: &mut bool) -> f64 {
    if rms > 0.0 {
        libm::log(rms)
    } else {
        *degenerate = true;
        LOG_FLOOR
    }
}

/// Runs `spec` for `duration` with a constant step `dt` and averages the
/// log-RMS of the residual field over all visited states.
pub fn estimate_mle(spec: &SimSpec, duration: f64, dt: f64) -> Result<MleEstimate> {
    if spec.stochastic_mask {
        return Err(Error::InvalidParameter(
            "the exponent estimate needs deterministic updates (mask off)",
        ));
    }
    let mut spec = spec.clone();
    spec.duration = duration;
    spec.disc.dt = dt;
    spec.scheduler = StepScheduler::Constant;
    spec.snapshot_every = None;
    let mut sim = Simulator::from_spec(&spec)?;
    let mut degenerate = false;
    let mut total = 0.0;
    let steps = sim.run_until(duration, &StepScheduler::Constant, |report, _| {
        total += log_norm(report.residual_rms, &mut degenerate);
    })?;
    total += log_norm(sim.residual_rms(), &mut degenerate);
    let samples = steps + 1;
    Ok(MleEstimate {
        lambda: total / samples as f64,
        samples,
        steps,
        degenerate,
    })
}
