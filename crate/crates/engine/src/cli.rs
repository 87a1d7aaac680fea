//! The `nca` command line.
//!
//! Exit codes: 0 on success, 1 for usage errors (unknown flags, malformed
//! values, out-of-range arguments), 2 for runtime failures (unreadable
//! files, diverging simulations).

use std::fs;
use std::io::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nca_core::analysis::{estimate_mle, find_fixed_point, sweep_dt, sweep_dx, FixedPointOptions, SweepReport};
use nca_core::discretization::{CellSize, Discretization, ScaleKeyframes};
use nca_core::dynamics::{simulate, simulate_observed, Integrator, SeedMode, SeedSpec, SimSpec, StepScheduler};
use nca_core::{rgb_of, GridShape, RuleWeights, Variant};

use crate::io::{load_state, load_target, load_weights, save_png, save_state, save_weights};
use crate::report;
use crate::syntax::{parse_keyframes, parse_number, parse_profile, parse_size, parse_values, CellProfile};

const VALUES_HELP: &str = "Sample values: `a..b:Nlog` (N log-spaced samples from a to b inclusive), \
`a..b:Nlin`, or a comma list. Numbers may be written as 1e-3 or 2^-4.";

#[derive(Debug, Parser)]
#[command(
    name = "nca",
    version,
    about = "Neural cellular automata with controllable time step and cell size"
)]
pub struct Cli {
    /// Worker threads for stepping and sweeps (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write the final RGB image.
    Synth(SynthArgs),
    /// Quality versus time step.
    SweepDt(SweepArgs),
    /// Quality versus cell size, on refined grids.
    SweepDx(SweepArgs),
    /// Switch the time step once during a run (policy A: 1 → 0.1, B: 0.1 → 1).
    Schedule(ScheduleArgs),
    /// Search for a spatially uniform state with zero update.
    FixedPoint(FixedPointArgs),
    /// Estimate the maximal Lyapunov exponent for one or more time steps.
    Mle(MleArgs),
    /// Cell size varying across the image width.
    Multiscale(MultiscaleArgs),
    /// Different cell sizes along x and y.
    Aniso(AnisoArgs),
    /// Time-varying cell size; writes a frame sequence.
    Grow(GrowArgs),
    /// Write a random weight file (for smoke tests and demos).
    InitWeights(InitWeightsArgs),
    /// Run the realtime steering service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeedModeArg {
    Zero,
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegratorArg {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    A,
    B,
}

fn variant_arg(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

fn number_arg(s: &str) -> Result<f64, String> {
    parse_number(s).map_err(|e| e.to_string())
}

fn positive_arg(s: &str) -> Result<f64, String> {
    match number_arg(s)? {
        v if v > 0.0 => Ok(v),
        v => Err(format!("must be positive, got {v}")),
    }
}

fn size_arg(s: &str) -> Result<(usize, usize), String> {
    let (h, w) = parse_size(s).map_err(|e| e.to_string())?;
    if h < 3 || w < 3 {
        return Err("grid sides must be at least 3".into());
    }
    Ok((h, w))
}

/// Parsed `--values`-style list.
#[derive(Debug, Clone, PartialEq)]
pub struct Values(pub Vec<f64>);

fn values_arg(s: &str) -> Result<Values, String> {
    parse_values(s).map(Values).map_err(|e| e.to_string())
}

fn profile_arg(s: &str) -> Result<CellProfile, String> {
    parse_profile(s).map_err(|e| e.to_string())
}

fn keyframes_arg(s: &str) -> Result<ScaleKeyframes, String> {
    parse_keyframes(s).map_err(|e| e.to_string())
}

/// Flags shared by every simulating subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// NCAW weight file.
    #[arg(long)]
    pub weights: PathBuf,
    /// Grid size `HxW`.
    #[arg(long, value_parser = size_arg)]
    pub size: Option<(usize, usize)>,
    /// End time `T` (equals the step count at Δt = 1). With `--init-state`
    /// the run continues from the stored time up to `T`.
    #[arg(short = 'T', long = "duration", visible_alias = "steps", value_parser = positive_arg)]
    pub duration: Option<f64>,
    /// Reinterpret the weights as another variant (vanilla, pe, noise).
    #[arg(long, value_parser = variant_arg)]
    pub variant: Option<Variant>,
    /// Initial state (default: noise for the noise variant, zero otherwise).
    #[arg(long, value_enum)]
    pub seed_mode: Option<SeedModeArg>,
    /// Noise seed strength ε.
    #[arg(long, value_parser = number_arg, default_value = "0.25")]
    pub eps: f64,
    /// Seed for the noise seed draw.
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Seed for the stochastic update mask.
    #[arg(long, default_value_t = 0)]
    pub mask_seed: u64,
    /// Stochastic update mask (default: off for the noise variant, on otherwise).
    #[arg(long, value_enum)]
    pub mask: Option<Toggle>,
    #[arg(long, value_enum, default_value = "euler")]
    pub integrator: IntegratorArg,
    /// Start from a saved state instead of a seed.
    #[arg(long)]
    pub init_state: Option<PathBuf>,
}

impl RunArgs {
    fn weights(&self) -> Result<RuleWeights> {
        let w = load_weights(&self.weights).with_context(|| format!("loading {}", self.weights.display()))?;
        Ok(match self.variant {
            Some(v) if v != w.variant => w.with_variant(v),
            _ => w,
        })
    }

    /// Spec with defaults `size`, `duration`; discretization left at 1.
    fn spec(&self, default_size: (usize, usize), default_duration: f64) -> Result<SimSpec> {
        let weights = self.weights()?;
        let (h, w) = self.size.unwrap_or(default_size);
        let shape = GridShape::new(h, w, weights.channels)?;
        let mut spec = SimSpec::for_rule(weights, shape, self.duration.unwrap_or(default_duration));
        let mode = match self.seed_mode {
            Some(SeedModeArg::Zero) => SeedMode::Zero,
            Some(SeedModeArg::Noise) => SeedMode::UniformNoise,
            None => spec.seed.mode,
        };
        spec.seed = match mode {
            SeedMode::Zero => SeedSpec::zero(),
            SeedMode::UniformNoise => SeedSpec::noise(self.eps, self.rng_seed),
        };
        if let Some(m) = self.mask {
            spec.stochastic_mask = m == Toggle::On;
        }
        spec.mask_rng_seed = self.mask_seed;
        spec.integrator = match self.integrator {
            IntegratorArg::Euler => Integrator::Euler,
            IntegratorArg::Rk4 => Integrator::Rk4,
        };
        if let Some(path) = &self.init_state {
            let grid = load_state(path).with_context(|| format!("loading {}", path.display()))?;
            spec.shape = grid.shape();
            spec.initial = Some(grid);
        }
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_parser = positive_arg, default_value = "1")]
    pub dt: f64,
    #[arg(long, value_parser = positive_arg, default_value = "1")]
    pub dx: f64,
    /// Cell height (default: same as --dx).
    #[arg(long, value_parser = positive_arg)]
    pub dy: Option<f64>,
    /// Output PNG.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write `<out>_<step>.png` and a state snapshot every k steps.
    #[arg(long)]
    pub snapshot_every: Option<u64>,
    /// Write the final state snapshot here.
    #[arg(long)]
    pub save_state: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Target texture (resized to the grid size when needed).
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_parser = values_arg, help = VALUES_HELP)]
    pub values: Option<Values>,
    /// Report path; `.json` selects JSON, anything else TSV. Default: stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, ignore_case = true)]
    pub policy: Policy,
    /// Time at which the step size switches.
    #[arg(long, value_parser = number_arg)]
    pub t_crit: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FixedPointArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Comma-separated initial state (default: zeros).
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long, value_parser = number_arg, default_value = "1e-6")]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Result file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MleArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Time step(s), in the same syntax as sweep values.
    #[arg(long, value_parser = values_arg, default_value = "1", help = VALUES_HELP)]
    pub dt: Values,
}

#[derive(Debug, Args)]
pub struct MultiscaleArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// `exp:a..b:symmetric` puts cell size a at both side borders and b at
    /// the center; `ramp` goes from a (left) to b (right).
    #[arg(long, value_parser = profile_arg, default_value = "exp:2^-3..2^0.5:symmetric")]
    pub dx_profile: CellProfile,
    /// Default: min(1, smallest cell size²).
    #[arg(long, value_parser = positive_arg)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnisoArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_parser = positive_arg)]
    pub dx: f64,
    #[arg(long, value_parser = positive_arg)]
    pub dy: f64,
    /// Default: min(1, smaller cell size²).
    #[arg(long, value_parser = positive_arg)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GrowArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Cell-size multiplier keyframes `t0:m0,t1:m1,…`, linear in between.
    #[arg(long, value_parser = keyframes_arg)]
    pub scale_keyframes: ScaleKeyframes,
    /// Default: min(1, smallest scaled cell size²).
    #[arg(long, value_parser = positive_arg)]
    pub dt: Option<f64>,
    /// Write a frame every k steps.
    #[arg(long, default_value_t = 10)]
    pub frame_every: u64,
    /// Output directory for `frame_<step>.png`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InitWeightsArgs {
    #[arg(long, default_value_t = nca_core::weights::DEFAULT_CHANNELS)]
    pub channels: usize,
    #[arg(long, default_value_t = nca_core::weights::DEFAULT_HIDDEN)]
    pub hidden: usize,
    #[arg(long, value_parser = variant_arg, default_value = "noise")]
    pub variant: Variant,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entries are uniform in ±scale/sqrt(fan_in).
    #[arg(long, value_parser = positive_arg, default_value = "0.5")]
    pub scale: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Directory of `.ncaw` files; uploads are stored here too.
    #[arg(long)]
    pub weights_dir: Option<PathBuf>,
    /// Require `?token=` on every request.
    #[arg(long)]
    pub token: Option<String>,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Errors go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let usage = e.downcast_ref::<UsageError>().is_some();
            eprintln!("error: {e:#}");
            if usage {
                1
            } else {
                2
            }
        }
    }
}

/// Argument combinations that parse but make no sense.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(usage("--jobs must be positive"));
        }
        // fails only if a pool was already installed by an earlier call
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::SweepDt(a) => sweep(a, false),
        Command::SweepDx(a) => sweep(a, true),
        Command::Schedule(a) => schedule(a),
        Command::FixedPoint(a) => fixed_point(a),
        Command::Mle(a) => mle(a),
        Command::Multiscale(a) => multiscale(a),
        Command::Aniso(a) => aniso(a),
        Command::Grow(a) => grow(a),
        Command::InitWeights(a) => init_weights(a),
        Command::Serve(a) => serve(a),
    }
}

fn write_rgb(spec_grid: &nca_core::CellGrid, path: &Path) -> Result<()> {
    save_png(&rgb_of(spec_grid), path).with_context(|| format!("writing {}", path.display()))
}

fn numbered(path: &Path, step: u64, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}_{step:06}.{ext}"))
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut spec = a.run.spec((128, 128), 300.0)?;
    spec.disc = Discretization::anisotropic(a.dt, a.dx as f32, a.dy.unwrap_or(a.dx) as f32);
    if a.snapshot_every == Some(0) {
        return Err(usage("--snapshot-every must be positive"));
    }
    let every = a.snapshot_every;
    let mut failed = None;
    let traj = simulate_observed(&spec, |report, grid| {
        if let Some(k) = every {
            let n = report.index + 1;
            if n % k == 0 && failed.is_none() {
                let r = write_rgb(grid, &numbered(&a.out, n, "png"))
                    .and_then(|_| Ok(save_state(grid, numbered(&a.out, n, "state"))?));
                failed = r.err();
            }
        }
    })?;
    if let Some(e) = failed {
        return Err(e);
    }
    write_rgb(&traj.final_grid, &a.out)?;
    if let Some(p) = &a.save_state {
        save_state(&traj.final_grid, p).with_context(|| format!("writing {}", p.display()))?;
    }
    println!("{} steps, t = {}", traj.steps, traj.final_grid.time());
    Ok(())
}

fn sweep(a: SweepArgs, cell_size: bool) -> Result<()> {
    let spec = a.run.spec((128, 128), 300.0)?;
    if cell_size && spec.initial.is_some() {
        return Err(usage("sweep-dx builds its own seeds; --init-state is not supported"));
    }
    let default = if cell_size {
        "2^-4..2^0:11log"
    } else {
        "1e-3..1e0:10log"
    };
    let values = match a.values {
        Some(Values(v)) => v,
        None => parse_values(default)?,
    };
    if values.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
        return Err(usage("sweep values must lie in (0, 1]"));
    }
    let target = load_target(&a.target, spec.shape.height, spec.shape.width)
        .with_context(|| format!("loading {}", a.target.display()))?;
    let rep: SweepReport = if cell_size {
        sweep_dx(&spec, &target, &values)?
    } else {
        sweep_dt(&spec, &target, &values)?
    };
    match &a.report {
        Some(path) => fs::write(path, report::render_for_path(&rep, path))
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", report::to_tsv(&rep)),
    }
    Ok(())
}

fn schedule(a: ScheduleArgs) -> Result<()> {
    let mut spec = a.run.spec((128, 128), 300.0)?;
    spec.scheduler = match a.policy {
        Policy::A => StepScheduler::policy_a(a.t_crit),
        Policy::B => StepScheduler::policy_b(a.t_crit),
    };
    let traj = simulate(&spec)?;
    write_rgb(&traj.final_grid, &a.out)?;
    println!("{} steps, t = {}", traj.steps, traj.final_grid.time());
    Ok(())
}

fn fixed_point(a: FixedPointArgs) -> Result<()> {
    let weights = load_weights(&a.weights).with_context(|| format!("loading {}", a.weights.display()))?;
    let init = match &a.init {
        Some(s) => s
            .split(',')
            .map(parse_number)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage(e.to_string()))?,
        None => vec![0.0; weights.channels],
    };
    if init.len() != weights.channels {
        return Err(usage(format!(
            "--init needs {} values, got {}",
            weights.channels,
            init.len()
        )));
    }
    let options = FixedPointOptions {
        tol: a.tol,
        max_iters: a.max_iters,
        ..FixedPointOptions::default()
    };
    let r = find_fixed_point(&weights, &init, options)?;
    let state: Vec<String> = r.state.iter().map(|v| v.to_string()).collect();
    let text = format!(
        "state\t{}\nobjective\t{}\niterations\t{}\nconverged\t{}\n",
        state.join(","),
        r.objective,
        r.iterations,
        r.converged
    );
    match &a.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn mle(a: MleArgs) -> Result<()> {
    let mut spec = a.run.spec((128, 128), 50.0)?;
    // the estimate follows one deterministic trajectory
    spec.stochastic_mask = false;
    let duration = spec.duration;
    let mut out = std::io::stdout().lock();
    writeln!(out, "dt\tlambda\tsteps")?;
    for &dt in &a.dt.0 {
        if dt.is_nan() || dt <= 0.0 {
            return Err(usage("--dt values must be positive"));
        }
        let est = estimate_mle(&spec, duration, dt)?;
        writeln!(out, "{dt}\t{}\t{}", est.lambda, est.steps)?;
    }
    Ok(())
}

fn auto_dt(explicit: Option<f64>, disc: &Discretization) -> f64 {
    explicit.unwrap_or_else(|| Discretization::stable_dt_for(disc.min_cell_size()))
}

fn multiscale(a: MultiscaleArgs) -> Result<()> {
    let mut spec = a.run.spec((256, 1536), 300.0)?;
    let (h, w) = (spec.shape.height, spec.shape.width);
    let field = a.dx_profile.field(h, w)?;
    spec.disc = Discretization {
        dt: 1.0,
        dx: field.clone(),
        dy: field,
        scale: None,
    };
    spec.disc.dt = auto_dt(a.dt, &spec.disc);
    let traj = simulate(&spec)?;
    write_rgb(&traj.final_grid, &a.out)?;
    println!("{} steps, dt = {}", traj.steps, spec.disc.dt);
    Ok(())
}

fn aniso(a: AnisoArgs) -> Result<()> {
    let mut spec = a.run.spec((128, 128), 300.0)?;
    spec.disc = Discretization::anisotropic(1.0, a.dx as f32, a.dy as f32);
    spec.disc.dt = auto_dt(a.dt, &spec.disc);
    let traj = simulate(&spec)?;
    write_rgb(&traj.final_grid, &a.out)?;
    println!("{} steps, dt = {}", traj.steps, spec.disc.dt);
    Ok(())
}

fn grow(a: GrowArgs) -> Result<()> {
    if a.frame_every == 0 {
        return Err(usage("--frame-every must be positive"));
    }
    let mut spec = a.run.spec((128, 128), 300.0)?;
    spec.disc = Discretization {
        dt: 1.0,
        dx: CellSize::Uniform(1.0),
        dy: CellSize::Uniform(1.0),
        scale: Some(a.scale_keyframes.clone()),
    };
    spec.disc.dt = auto_dt(a.dt, &spec.disc);
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut failed = None;
    let first = nca_core::rgb_of(&spec.initial_grid()?);
    save_png(&first, a.out.join(format!("frame_{:06}.png", 0)))?;
    let traj = simulate_observed(&spec, |report, grid| {
        let n = report.index + 1;
        if n % a.frame_every == 0 && failed.is_none() {
            failed = write_rgb(grid, &a.out.join(format!("frame_{n:06}.png"))).err();
        }
    })?;
    if let Some(e) = failed {
        return Err(e);
    }
    println!("{} steps, dt = {}", traj.steps, spec.disc.dt);
    Ok(())
}

fn init_weights(a: InitWeightsArgs) -> Result<()> {
    if a.channels < 3 || a.hidden == 0 {
        return Err(usage("need at least 3 channels and 1 hidden unit"));
    }
    let w = RuleWeights::random(a.channels, a.hidden, a.variant, a.seed, a.scale as f32);
    save_weights(&w, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .try_init();
    let config = crate::service::ServiceConfig {
        weights_dir: a.weights_dir,
        token: a.token,
        ..crate::service::ServiceConfig::default()
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(crate::service::serve(a.addr, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_examples() {
        Cli::try_parse_from([
            "nca",
            "synth",
            "--weights",
            "w",
            "--dt",
            "1.0",
            "-T",
            "300",
            "--size",
            "128x128",
            "--out",
            "o.png",
        ])
        .unwrap();
        Cli::try_parse_from([
            "nca",
            "sweep-dt",
            "--weights",
            "w",
            "--target",
            "t.png",
            "--values",
            "1e-3..1e0:10log",
            "--report",
            "r.tsv",
        ])
        .unwrap();
        Cli::try_parse_from([
            "nca",
            "sweep-dx",
            "--weights",
            "w",
            "--target",
            "t.png",
            "--values",
            "2^-4..2^0:11log",
        ])
        .unwrap();
        Cli::try_parse_from([
            "nca",
            "schedule",
            "--weights",
            "w",
            "--policy",
            "A",
            "--t-crit",
            "3",
            "--out",
            "o.png",
        ])
        .unwrap();
        Cli::try_parse_from([
            "nca",
            "fixed-point",
            "--weights",
            "w",
            "--init",
            "0,0,0",
            "--tol",
            "1e-6",
        ])
        .unwrap();
        Cli::try_parse_from([
            "nca",
            "mle",
            "--weights",
            "w",
            "-T",
            "50",
            "--dt",
            "0.1",
            "--eps",
            "0.25",
        ])
        .unwrap();
        Cli::try_parse_from([
            "nca",
            "multiscale",
            "--weights",
            "w",
            "--size",
            "256x1536",
            "--dx-profile",
            "exp:2^-3..2^0.5:symmetric",
            "--out",
            "o.png",
        ])
        .unwrap();
        Cli::try_parse_from([
            "nca",
            "aniso",
            "--weights",
            "w",
            "--dx",
            "0.5",
            "--dy",
            "1",
            "--out",
            "o.png",
        ])
        .unwrap();
        Cli::try_parse_from([
            "nca",
            "grow",
            "--weights",
            "w",
            "--scale-keyframes",
            "0:1,100:0.5",
            "--out",
            "frames",
        ])
        .unwrap();
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(main_with_args(["nca", "synth", "--bogus"]), 1);
        assert_eq!(
            main_with_args([
                "nca",
                "sweep-dt",
                "--weights",
                "w",
                "--target",
                "t",
                "--values",
                "1..2:3"
            ]),
            1
        );
        assert_eq!(
            main_with_args(["nca", "synth", "--weights", "w", "--size", "2x2", "--out", "o"]),
            1
        );
        assert_eq!(
            main_with_args(["nca", "synth", "--weights", "w", "--dt", "-1", "--out", "o"]),
            1
        );
    }

    #[test]
    fn missing_files_exit_with_two() {
        assert_eq!(
            main_with_args([
                "nca",
                "synth",
                "--weights",
                "/nonexistent/w.ncaw",
                "--out",
                "/tmp/x.png"
            ]),
            2
        );
    }
}
