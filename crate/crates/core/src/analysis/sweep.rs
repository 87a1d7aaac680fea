//! Generalization sweeps over the time step and the cell size.
//!
//! Each sample runs the same spec (same seeds) with one discretization
//! parameter changed and scores the final RGB against a target with the
//! appearance proxy. Quality is reported relative to the training
//! discretization: `ratio = loss(1.0) / loss(value)`, so 1 means "as good as
//! at training resolution" and smaller is worse.
//!
//! For cell-size sweeps the grid grows to `⌈H/Δx⌉ × ⌈W/Δx⌉`, the step shrinks
//! to `Δt = min(1, Δx²)` and the output is resized back to `H × W` before
//! scoring.

use alloc::vec::Vec;

use crate::analysis::texture::{resize_bilinear, texture_distance};
use crate::discretization::Discretization;
use crate::dynamics::{simulate, SeedSpec, SimSpec, StepScheduler};
use crate::grid::{rgb_of, GridShape, Image};
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Dt,
    Dx,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Dt => "dt",
            SweepAxis::Dx => "dx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepEntry {
    pub value: f64,
    pub loss: f64,
    pub ratio: f64,
    pub height: usize,
    pub width: usize,
    pub dt: f64,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub axis: SweepAxis,
    /// Ascending in `value`.
    pub entries: Vec<SweepEntry>,
    /// Loss at the training discretization (value 1.0).
    pub reference_loss: f64,
    pub duration: f64,
    /// Grid shape at value 1.0; also the scoring resolution.
    pub base_shape: GridShape,
    pub seed: SeedSpec,
    pub stochastic_mask: bool,
    pub mask_rng_seed: u64,
}

/// `n` log-uniform samples from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (libm::log2(lo), libm::log2(hi));
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        libm::exp2(a + (b - a) * i as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

/// Grid shape and step used for one cell-size sample.
pub fn dx_sample_plan(base: GridShape, dx: f64) -> (GridShape, f64) {
    // slack absorbs rounding in log-spaced cell sizes such as 2^-2
    let side = |n: usize| libm::ceil(n as f64 / dx - 1e-9) as usize;
    let shape = GridShape {
        height: side(base.height),
        width: side(base.width),
        channels: base.channels,
    };
    (shape, (dx * dx).min(1.0))
}

fn check_values(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one value"));
    }
    if values.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
        return Err(Error::InvalidParameter("sweep values must lie in (0, 1]"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Ok(sorted)
}

fn ratio(reference: f64, loss: f64) -> f64 {
    if loss == reference {
        1.0
    } else {
        reference / loss
    }
}

struct Sample {
    value: f64,
    spec: SimSpec,
}

fn run_samples(
    axis: SweepAxis,
    template: &SimSpec,
    target: &Image,
    values: &[f64],
    make: impl Fn(f64) -> SimSpec + Sync,
) -> Result<SweepReport> {
    template.validate()?;
    let base = template.shape;
    if target.height != base.height || target.width != base.width {
        return Err(Error::InvalidParameter("target image must match the base grid size"));
    }
    let values = check_values(values)?;
    let mut jobs: Vec<Sample> = values
        .iter()
        .map(|&value| Sample {
            value,
            spec: make(value),
        })
        .collect();
    let has_reference = values.last() == Some(&1.0);
    if !has_reference {
        jobs.push(Sample {
            value: 1.0,
            spec: make(1.0),
        });
    }
    let results = par::map_jobs(&jobs, |job| -> Result<(f64, u64)> {
        let traj = simulate(&job.spec)?;
        let rgb = resize_bilinear(&rgb_of(&traj.final_grid), base.height, base.width);
        Ok((texture_distance(&rgb, target)?, traj.steps))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let reference_loss = results[jobs.iter().position(|j| j.value == 1.0).unwrap_or(jobs.len() - 1)].0;
    let entries = jobs
        .iter()
        .zip(&results)
        .take(values.len())
        .map(|(job, &(loss, steps))| SweepEntry {
            value: job.value,
            loss,
            ratio: ratio(reference_loss, loss),
            height: job.spec.shape.height,
            width: job.spec.shape.width,
            dt: job.spec.disc.dt,
            steps,
        })
        .collect();
    Ok(SweepReport {
        axis,
        entries,
        reference_loss,
        duration: template.duration,
        base_shape: base,
        seed: template.seed,
        stochastic_mask: template.stochastic_mask,
        mask_rng_seed: template.mask_rng_seed,
    })
}

/// Runs `template` once per `Δt` in `values` with a constant scheduler.
pub fn sweep_dt(template: &SimSpec, target: &Image, values: &[f64]) -> Result<SweepReport> {
    run_samples(SweepAxis::Dt, template, target, values, |dt| {
        let mut spec = template.clone();
        spec.disc.dt = dt;
        spec.scheduler = StepScheduler::Constant;
        spec.snapshot_every = None;
        spec
    })
}

/// Runs `template` once per cell size `Δx = Δy` in `values` on the refined
/// grid, with `Δt = min(1, Δx²)`.
pub fn sweep_dx(template: &SimSpec, target: &Image, values: &[f64]) -> Result<SweepReport> {
    if template.initial.is_some() {
        return Err(Error::InvalidParameter("cell-size sweeps build their own seed grids"));
    }
    run_samples(SweepAxis::Dx, template, target, values, |dx| {
        let (shape, dt) = dx_sample_plan(template.shape, dx);
        let mut spec = template.clone();
        spec.shape = shape;
        spec.disc = Discretization::uniform(dt, dx as f32);
        spec.scheduler = StepScheduler::Constant;
        spec.snapshot_every = None;
        spec
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{RuleWeights, Variant};

    #[test]
    fn log_spaced_endpoints_and_count() {
        let v = log_spaced(1e-3, 1.0, 10);
        assert_eq!(v.len(), 10);
        assert_eq!(v[0], 1e-3);
        assert_eq!(v[9], 1.0);
        assert!(v.windows(2).all(|p| p[0] < p[1]));
        let r = v[1] / v[0];
        for p in v.windows(2) {
            assert!((p[1] / p[0] - r).abs() < 1e-12);
        }
        let d = log_spaced(0.0625, 1.0, 11);
        assert_eq!(d[0], 0.0625);
        assert!((d[5] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dx_plan_matches_refinement_rule() {
        let base = GridShape::new(128, 128, 12).unwrap();
        assert_eq!(dx_sample_plan(base, 1.0), (base, 1.0));
        let (s, dt) = dx_sample_plan(base, 0.5);
        assert_eq!((s.height, s.width, dt), (256, 256, 0.25));
        let (s, dt) = dx_sample_plan(base, 0.0625);
        assert_eq!((s.height, s.width, dt), (2048, 2048, 1.0 / 256.0));
    }

    #[test]
    fn single_reference_value() {
        let w = RuleWeights::random(3, 4, Variant::Noise, 2, 0.5);
        let spec = SimSpec::for_rule(w, GridShape::new(16, 16, 3).unwrap(), 3.0);
        let target = Image::filled(16, 16, [0.5; 3]);
        let r = sweep_dt(&spec, &target, &[1.0]).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].ratio, 1.0);
    }

    #[test]
    fn rejects_out_of_range_values() {
        let w = RuleWeights::zeros(3, 4, Variant::Noise);
        let spec = SimSpec::for_rule(w, GridShape::new(8, 8, 3).unwrap(), 1.0);
        let target = Image::filled(8, 8, [0.5; 3]);
        assert!(sweep_dt(&spec, &target, &[0.5, 2.0]).is_err());
        assert!(sweep_dx(&spec, &target, &[0.0]).is_err());
        assert!(sweep_dt(&spec, &target, &[]).is_err());
        assert!(sweep_dt(&spec, &Image::filled(4, 8, [0.0; 3]), &[1.0]).is_err());
    }
}
