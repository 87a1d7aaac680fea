//! Seeds, stochastic masks, integrators and step schedulers.
//!
//! A run advances `S` in PDE time: each step picks `Δt` from the scheduler at
//! the step's start time, evaluates `ΔS = residual(perceive(S))`, and applies
//! `S ← S + ΔS · δ · Δt` (Euler) or the classical four-stage Runge-Kutta
//! combination. The run stops at the first step whose start time reaches the
//! duration `T`, so a constant step takes exactly `⌈T/Δt⌉` steps.

use alloc::vec;
use alloc::vec::Vec;

use crate::adaptation::Network;
use crate::discretization::Discretization;
use crate::grid::{CellGrid, GridShape};
use crate::perception::{check_inputs, perceive_row, FilterBank, PerceiveParams};
use crate::rng;
use crate::weights::{RuleWeights, Variant};
use crate::{par, Error, Result};

/// Default noise strength for noise seeds.
pub const DEFAULT_EPSILON: f64 = 0.25;

/// Relative slack used when comparing accumulated simulation times.
const TIME_SLACK: f64 = 1e-9;

fn slack(reference: f64) -> f64 {
    TIME_SLACK * reference.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    Zero,
    UniformNoise,
}

/// Initial state `S(t = 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedSpec {
    pub mode: SeedMode,
    /// Noise strength; values are drawn from `U[-ε, ε]`. Ignored for zero seeds.
    pub epsilon: f64,
    pub rng_seed: u64,
}

impl SeedSpec {
    pub fn zero() -> Self {
        Self {
            mode: SeedMode::Zero,
            epsilon: 0.0,
            rng_seed: 0,
        }
    }

    pub fn noise(epsilon: f64, rng_seed: u64) -> Self {
        Self {
            mode: SeedMode::UniformNoise,
            epsilon,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == SeedMode::UniformNoise && !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::NonPositive {
                what: "noise strength",
                value: self.epsilon,
            });
        }
        Ok(())
    }
}

/// Builds the seed grid. Noise values come from the counter-based generator
/// keyed on `(rng_seed, x, y, channel)`, so the grid depends only on the spec.
pub fn make_seed(shape: GridShape, spec: &SeedSpec) -> Result<CellGrid> {
    spec.validate()?;
    let mut grid = CellGrid::zeros(shape)?;
    if spec.mode == SeedMode::UniformNoise {
        let (w, c) = (shape.width, shape.channels);
        let eps = spec.epsilon;
        let seed = spec.rng_seed;
        par::for_each_row(grid.data_mut(), w * c, |y, row| {
            for (x, cell) in row.chunks_exact_mut(c).enumerate() {
                for (ch, v) in cell.iter_mut().enumerate() {
                    *v = rng::cell_symmetric(seed, x, y, ch, eps);
                }
            }
        });
    }
    Ok(grid)
}

/// Chooses `Δt` as a function of simulation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepScheduler {
    /// Always the discretization's `dt`.
    Constant,
    /// `dt_before` while the step starts before `t_crit`, `dt_after` from then
    /// on.
    PiecewiseAb { dt_before: f64, dt_after: f64, t_crit: f64 },
}

impl StepScheduler {
    /// Coarse training step first, then fine steps: `1.0 → 0.1`.
    pub fn policy_a(t_crit: f64) -> Self {
        StepScheduler::PiecewiseAb {
            dt_before: 1.0,
            dt_after: 0.1,
            t_crit,
        }
    }

    /// Fine steps first, then the training step: `0.1 → 1.0`.
    pub fn policy_b(t_crit: f64) -> Self {
        StepScheduler::PiecewiseAb {
            dt_before: 0.1,
            dt_after: 1.0,
            t_crit,
        }
    }

    pub fn dt_at(&self, t: f64, base_dt: f64) -> f64 {
        match *self {
            StepScheduler::Constant => base_dt,
            StepScheduler::PiecewiseAb {
                dt_before,
                dt_after,
                t_crit,
            } => {
                if t < t_crit - slack(t_crit) {
                    dt_before
                } else {
                    dt_after
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let StepScheduler::PiecewiseAb {
            dt_before,
            dt_after,
            t_crit,
        } = *self
        {
            for dt in [dt_before, dt_after] {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(Error::NonPositive { what: "dt", value: dt });
                }
            }
            if !t_crit.is_finite() {
                return Err(Error::InvalidParameter("t_crit must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    Rk4,
}

/// One reproducible run.
#[derive(Debug, Clone)]
pub struct SimSpec {
    pub weights: RuleWeights,
    pub shape: GridShape,
    pub seed: SeedSpec,
    /// Explicit initial grid; when set it replaces the seed.
    pub initial: Option<CellGrid>,
    pub disc: Discretization,
    pub scheduler: StepScheduler,
    pub integrator: Integrator,
    /// Duration `T` in PDE time units.
    pub duration: f64,
    pub stochastic_mask: bool,
    pub mask_rng_seed: u64,
    /// Keep a copy of the grid every this many steps.
    pub snapshot_every: Option<u64>,
}

impl SimSpec {
    /// Defaults for the rule's variant at the training discretization:
    /// noise rules start from `U[-0.25, 0.25]` with the mask off, the others
    /// from zero with the mask on.
    pub fn for_rule(weights: RuleWeights, shape: GridShape, duration: f64) -> Self {
        let noise = weights.variant == Variant::Noise;
        Self {
            weights,
            shape,
            seed: if noise {
                SeedSpec::noise(DEFAULT_EPSILON, 0)
            } else {
                SeedSpec::zero()
            },
            initial: None,
            disc: Discretization::default(),
            scheduler: StepScheduler::Constant,
            integrator: Integrator::Euler,
            duration,
            stochastic_mask: !noise,
            mask_rng_seed: 0,
            snapshot_every: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.shape.check()?;
        if self.shape.channels != self.weights.channels {
            return Err(Error::DimensionMismatch {
                what: "grid channels vs rule channels",
                expected: self.weights.channels,
                actual: self.shape.channels,
            });
        }
        self.disc.validate()?;
        self.disc.check_shape(self.shape.height, self.shape.width)?;
        self.scheduler.validate()?;
        if self.weights.variant == Variant::Noise {
            if self.stochastic_mask {
                return Err(Error::InvalidParameter(
                    "noise rules update deterministically; disable the mask",
                ));
            }
            if self.initial.is_none() && self.seed.mode != SeedMode::UniformNoise {
                return Err(Error::InvalidParameter("noise rules start from a uniform noise seed"));
            }
        }
        if self.integrator == Integrator::Rk4 && self.stochastic_mask {
            return Err(Error::MaskedRk4);
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParameter("duration must be finite and non-negative"));
        }
        if let Some(initial) = &self.initial {
            if initial.shape() != self.shape {
                return Err(Error::InvalidParameter("initial grid shape differs from spec shape"));
            }
        }
        self.seed.validate()
    }

    pub fn initial_grid(&self) -> Result<CellGrid> {
        match &self.initial {
            Some(g) => Ok(g.clone()),
            None => make_seed(self.shape, &self.seed),
        }
    }

    /// Number of steps the run takes, without running it.
    pub fn step_count(&self) -> u64 {
        let mut clock = Clock::new(0.0);
        let mut n = 0;
        while !clock.reached(self.duration) {
            clock.advance(self.scheduler.dt_at(clock.now(), self.disc.dt));
            n += 1;
        }
        n
    }
}

/// Simulation time as `segment_start + k · dt` over runs of equal `dt`, so
/// long runs of a constant step do not accumulate rounding error.
#[derive(Debug, Clone, Copy)]
struct Clock {
    segment_start: f64,
    segment_dt: f64,
    segment_steps: u64,
}

impl Clock {
    fn new(t: f64) -> Self {
        Self {
            segment_start: t,
            segment_dt: 0.0,
            segment_steps: 0,
        }
    }

    fn now(&self) -> f64 {
        self.segment_start + self.segment_steps as f64 * self.segment_dt
    }

    fn advance(&mut self, dt: f64) {
        if dt != self.segment_dt {
            *self = Self {
                segment_start: self.now(),
                segment_dt: dt,
                segment_steps: 0,
            };
        }
        self.segment_steps += 1;
    }

    fn reached(&self, duration: f64) -> bool {
        self.now() >= duration - slack(duration)
    }
}

/// What happened during one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Zero-based index of the step.
    pub index: u64,
    pub t_start: f64,
    pub dt: f64,
    /// RMS over cells and channels of `ΔS` at the step's starting state,
    /// before masking and `Δt` scaling.
    pub residual_rms: f64,
}

/// Steps a grid forward; owns the state between steps.
#[derive(Debug, Clone)]
pub struct Simulator {
    weights: RuleWeights,
    net: Network,
    grid: CellGrid,
    disc: Discretization,
    integrator: Integrator,
    mask: bool,
    mask_seed: u64,
    steps: u64,
    clock: Clock,
}

impl Simulator {
    pub fn new(
        weights: RuleWeights,
        grid: CellGrid,
        disc: Discretization,
        integrator: Integrator,
        mask: bool,
        mask_seed: u64,
    ) -> Result<Self> {
        weights.validate()?;
        check_inputs(&grid, &weights, &disc)?;
        if integrator == Integrator::Rk4 && mask {
            return Err(Error::MaskedRk4);
        }
        let clock = Clock::new(grid.time());
        Ok(Self {
            net: Network::new(&weights),
            weights,
            grid,
            disc,
            integrator,
            mask,
            mask_seed,
            steps: 0,
            clock,
        })
    }

    pub fn from_spec(spec: &SimSpec) -> Result<Self> {
        spec.validate()?;
        Self::new(
            spec.weights.clone(),
            spec.initial_grid()?,
            spec.disc.clone(),
            spec.integrator,
            spec.stochastic_mask,
            spec.mask_rng_seed,
        )
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn into_grid(self) -> CellGrid {
        self.grid
    }

    pub fn weights(&self) -> &RuleWeights {
        &self.weights
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn time(&self) -> f64 {
        self.clock.now()
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    pub fn mask_enabled(&self) -> bool {
        self.mask
    }

    /// Replaces the discretization; takes effect at the next step.
    pub fn set_discretization(&mut self, disc: Discretization) -> Result<()> {
        disc.validate()?;
        disc.check_shape(self.grid.height(), self.grid.width())?;
        self.disc = disc;
        Ok(())
    }

    /// Replaces the state, keeping the clock. Values must be finite.
    pub fn replace_grid(&mut self, mut grid: CellGrid) -> Result<()> {
        if grid.shape() != self.grid.shape() {
            return Err(Error::InvalidParameter("replacement grid shape differs"));
        }
        if let Some(index) = grid.first_non_finite() {
            return Err(Error::NonFinite {
                what: "grid data",
                index,
            });
        }
        grid.set_time(self.time());
        self.grid = grid;
        Ok(())
    }

    /// Edits the state in place (perturbations). Non-finite values written by
    /// `f` are reported at the next step.
    pub fn edit_grid(&mut self, f: impl FnOnce(&mut CellGrid)) {
        f(&mut self.grid);
    }

    fn perceive_params(&self) -> PerceiveParams<'_> {
        PerceiveParams {
            bank: FilterBank::for_rule(&self.weights),
            positional: self.weights.variant == Variant::Pe,
            dx: &self.disc.dx,
            dy: &self.disc.dy,
            multiplier: self.disc.scale_at(self.clock.now()),
        }
    }

    /// `ΔS` at `grid` plus the sum of squares of its entries.
    fn residual_field(&self, grid: &CellGrid, params: &PerceiveParams<'_>) -> (Vec<f32>, f64) {
        let (w, c) = (grid.width(), grid.channels());
        let inputs = params.inputs(c);
        let mut out = vec![0.0f32; grid.shape().len()];
        let sums = par::map_rows(&mut out, w * c, |y, row| {
            let mut z = vec![0.0f32; w * inputs];
            let mut scratch = vec![0.0f32; self.net.hidden()];
            perceive_row(grid, params, y, &mut z);
            self.net.eval_row(&z, &mut scratch, row);
            row.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>()
        });
        (out, sums.iter().sum())
    }

    /// RMS of `ΔS` at the current state.
    pub fn residual_rms(&self) -> f64 {
        let params = self.perceive_params();
        let (_, sumsq) = self.residual_field(&self.grid, &params);
        libm::sqrt(sumsq / self.grid.shape().len() as f64)
    }

    fn euler(&self, dt: f64) -> (Vec<f32>, f64) {
        let grid = &self.grid;
        let params = self.perceive_params();
        let (w, c) = (grid.width(), grid.channels());
        let inputs = params.inputs(c);
        let step = self.steps;
        let (mask, mask_seed) = (self.mask, self.mask_seed);
        let mut next = vec![0.0f32; grid.shape().len()];
        let sums = par::map_rows(&mut next, w * c, |y, row| {
            let mut z = vec![0.0f32; w * inputs];
            let mut scratch = vec![0.0f32; self.net.hidden()];
            perceive_row(grid, &params, y, &mut z);
            self.net.eval_row(&z, &mut scratch, row);
            let src = &grid.data()[y * w * c..(y + 1) * w * c];
            let mut sumsq = 0.0f64;
            for (x, (out, s)) in row.chunks_exact_mut(c).zip(src.chunks_exact(c)).enumerate() {
                sumsq += out.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>();
                let gate = !mask || rng::mask_bit(mask_seed, x, y, step);
                for (o, &sv) in out.iter_mut().zip(s) {
                    *o = if gate {
                        (f64::from(sv) + f64::from(*o) * dt) as f32
                    } else {
                        sv
                    };
                }
            }
            sumsq
        });
        (next, sums.iter().sum())
    }

    fn rk4(&self, dt: f64) -> (Vec<f32>, f64) {
        let params = self.perceive_params();
        let base = &self.grid;
        let stage = |k: &[f32], h: f64| -> CellGrid {
            let mut g = base.clone();
            for (v, &kv) in g.data_mut().iter_mut().zip(k) {
                *v = (f64::from(*v) + h * f64::from(kv)) as f32;
            }
            g
        };
        let (k1, sumsq) = self.residual_field(base, &params);
        let (k2, _) = self.residual_field(&stage(&k1, 0.5 * dt), &params);
        let (k3, _) = self.residual_field(&stage(&k2, 0.5 * dt), &params);
        let (k4, _) = self.residual_field(&stage(&k3, dt), &params);
        let next = base
            .data()
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let incr = f64::from(k1[i]) + 2.0 * f64::from(k2[i]) + 2.0 * f64::from(k3[i]) + f64::from(k4[i]);
                (f64::from(s) + dt / 6.0 * incr) as f32
            })
            .collect();
        (next, sumsq)
    }

    /// Takes one step of size `dt`.
    pub fn advance(&mut self, dt: f64) -> Result<StepReport> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::NonPositive { what: "dt", value: dt });
        }
        let t_start = self.clock.now();
        let (next, sumsq) = match self.integrator {
            Integrator::Euler => self.euler(dt),
            Integrator::Rk4 => self.rk4(dt),
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step: self.steps });
        }
        let report = StepReport {
            index: self.steps,
            t_start,
            dt,
            residual_rms: libm::sqrt(sumsq / next.len() as f64),
        };
        self.clock.advance(dt);
        self.steps += 1;
        let shape = self.grid.shape();
        self.grid = CellGrid::from_vec(shape, next, self.clock.now())?;
        Ok(report)
    }

    /// Steps until the start time reaches `duration`, choosing each `Δt` from
    /// `scheduler` at the step's start time.
    pub fn run_until(
        &mut self,
        duration: f64,
        scheduler: &StepScheduler,
        mut observe: impl FnMut(&StepReport, &CellGrid),
    ) -> Result<u64> {
        let mut n = 0;
        while !self.clock.reached(duration) {
            let dt = scheduler.dt_at(self.clock.now(), self.disc.dt);
            let report = self.advance(dt)?;
            observe(&report, &self.grid);
            n += 1;
        }
        Ok(n)
    }
}

/// Single Euler step of the update rule.
///
/// `S' = S + ΔS · δ · dt`, where `δ(x, y)` is one Bernoulli(½) draw per cell
/// keyed on `(mask_rng_seed, x, y, step_index)` when `mask_on`, else 1. The
/// cell-size multiplier is evaluated at `grid.time()`.
pub fn step(
    grid: &CellGrid,
    weights: &RuleWeights,
    disc: &Discretization,
    dt: f64,
    mask_on: bool,
    step_index: u64,
    mask_rng_seed: u64,
) -> Result<CellGrid> {
    let mut sim = Simulator::new(
        weights.clone(),
        grid.clone(),
        disc.clone(),
        Integrator::Euler,
        mask_on,
        mask_rng_seed,
    )?;
    sim.steps = step_index;
    sim.advance(dt).map_err(|e| match e {
        Error::Diverged { .. } => Error::Diverged { step: step_index },
        other => other,
    })?;
    Ok(sim.into_grid())
}

/// Final state of a run plus periodic snapshots.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_grid: CellGrid,
    pub snapshots: Vec<CellGrid>,
    pub steps: u64,
}

pub fn simulate(spec: &SimSpec) -> Result<Trajectory> {
    simulate_observed(spec, |_, _| {})
}

/// [`simulate`] with a callback after every step.
pub fn simulate_observed(spec: &SimSpec, mut observe: impl FnMut(&StepReport, &CellGrid)) -> Result<Trajectory> {
    let mut sim = Simulator::from_spec(spec)?;
    let mut snapshots = Vec::new();
    let every = spec.snapshot_every.filter(|&k| k > 0);
    let steps = sim.run_until(spec.duration, &spec.scheduler, |report, grid| {
        if let Some(k) = every {
            if (report.index + 1) % k == 0 {
                snapshots.push(grid.clone());
            }
        }
        observe(report, grid);
    })?;
    Ok(Trajectory {
        final_grid: sim.into_grid(),
        snapshots,
        steps,
    })
}
