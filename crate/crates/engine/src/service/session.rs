//! One steering session: a simulation plus the controls a client can apply
//! to it.
//!
//! [`Session`] is a plain state machine. Control messages are applied
//! between steps only, so every step runs with a single `Δt` and cell size.
//! [`spawn`] drives a session on its own thread: while running it steps
//! continuously and checks for messages between steps, while paused (or
//! before `start`) it blocks on the message queue.

use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use base64::Engine as _;
use nca_core::analysis::lyapunov::LOG_FLOOR;
use nca_core::discretization::{CellSize, Discretization, ScaleKeyframes};
use nca_core::dynamics::{SeedMode, SimSpec, Simulator, DEFAULT_EPSILON};
use nca_core::rng::{cell_symmetric, finalize};
use nca_core::weights::Padding;
use nca_core::{rgb_of, GridShape, Variant};
use tokio::sync::mpsc as async_mpsc;

use super::protocol::{CellMode, ClientMessage, FieldPayload, PerturbKind, ServerMessage, SizeSpec};
use super::store::WeightStore;
use crate::io::{encode_png, encode_state, rgba8_frame};
use crate::syntax::parse_size;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    /// Initial frame interval in steps (client-settable).
    pub frame_every: u64,
    /// Upper bound on frames per second.
    pub max_fps: f64,
    pub stats_interval: Duration,
    /// Frames waiting for the network; further frames are dropped.
    pub frame_queue: usize,
    /// Largest accepted grid side.
    pub max_side: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            frame_every: 1,
            max_fps: 60.0,
            stats_interval: Duration::from_millis(250),
            frame_queue: 2,
            max_side: 2048,
        }
    }
}

/// Something to send to the client.
#[derive(Debug, Clone, PartialEq)]
pub enum Outbound {
    Message(ServerMessage),
    /// A `frame` message and the binary frame it describes.
    Frame {
        meta: ServerMessage,
        pixels: Vec<u8>,
    },
}

struct Active {
    spec: SimSpec,
    sim: Simulator,
    eps: f64,
}

pub struct Session {
    store: WeightStore,
    config: SessionConfig,
    active: Option<Active>,
    paused: bool,
    frame_every: u64,
    frame_seq: u64,
    steps_since_frame: u64,
    last_frame: Option<Instant>,
    last_dt: f64,
    stats_at: Option<Instant>,
    stats_steps: u64,
    log_sum: f64,
    log_count: u64,
    perturbations: u64,
}

fn error(message: impl Into<String>) -> Outbound {
    Outbound::Message(ServerMessage::Error {
        message: message.into(),
    })
}

impl Session {
    pub fn new(store: WeightStore, config: SessionConfig) -> Self {
        Self {
            store,
            frame_every: config.frame_every.max(1),
            config,
            active: None,
            paused: false,
            frame_seq: 0,
            steps_since_frame: 0,
            last_frame: None,
            last_dt: 0.0,
            stats_at: None,
            stats_steps: 0,
            log_sum: 0.0,
            log_count: 0,
            perturbations: 0,
        }
    }

    /// Started and not paused: the driver should keep stepping.
    pub fn is_running(&self) -> bool {
        self.active.is_some() && !self.paused
    }

    pub fn simulator(&self) -> Option<&Simulator> {
        self.active.as_ref().map(|a| &a.sim)
    }

    /// Parses and applies one text message. Malformed input yields an error
    /// reply and leaves the session unchanged.
    pub fn handle_text(&mut self, text: &str, now: Instant) -> Vec<Outbound> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg, now),
            Err(e) => vec![error(format!("malformed message: {e}"))],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage, now: Instant) -> Vec<Outbound> {
        let op = msg.op();
        match self.apply(msg, now) {
            Ok(mut out) => {
                if let Some(a) = &self.active {
                    out.insert(
                        0,
                        Outbound::Message(ServerMessage::Ack {
                            of: op.to_string(),
                            step: a.sim.steps_taken(),
                            t: a.sim.time(),
                        }),
                    );
                }
                out
            }
            Err(message) => vec![error(format!("{op}: {message}"))],
        }
    }

    fn active(&mut self) -> Result<&mut Active, String> {
        self.active
            .as_mut()
            .ok_or_else(|| "no simulation; send start first".to_string())
    }

    fn apply(&mut self, msg: ClientMessage, now: Instant) -> Result<Vec<Outbound>, String> {
        match msg {
            ClientMessage::Start {
                weights_id,
                size,
                variant,
                eps,
                rng_seed,
                dt,
            } => {
                let active = self.build(&weights_id, size, variant, eps, rng_seed, dt)?;
                let g = active.sim.grid();
                let ready = ServerMessage::Ready {
                    width: g.width(),
                    height: g.height(),
                    channels: g.channels(),
                    variant: active.spec.weights.variant.name().to_string(),
                    dt: active.sim.discretization().dt,
                };
                self.active = Some(active);
                self.paused = false;
                self.restart_counters(now);
                Ok(vec![Outbound::Message(ready), self.frame(now)])
            }
            ClientMessage::SetDt { value } => {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(format!("dt must be positive, got {value}"));
                }
                let a = self.active()?;
                let disc = Discretization {
                    dt: value,
                    ..a.sim.discretization().clone()
                };
                a.sim.set_discretization(disc).map_err(|e| e.to_string())?;
                Ok(vec![])
            }
            ClientMessage::SetCellSize { mode, dx, dy, field } => {
                let a = self.active()?;
                let (h, w) = (a.sim.grid().height(), a.sim.grid().width());
                let (cx, cy) = match mode {
                    CellMode::Uniform => {
                        let dx = dx.ok_or("uniform mode needs dx")?;
                        (CellSize::Uniform(dx), CellSize::Uniform(dy.unwrap_or(dx)))
                    }
                    CellMode::Field => {
                        let f = field.ok_or("field mode needs a field payload")?;
                        if f.height == 0 || f.width == 0 || f.height > h || f.width > w {
                            return Err(format!("field is {}x{}, grid is {h}x{w}", f.height, f.width));
                        }
                        let fx = upsampled_field(&f, &f.dx, h, w)?;
                        let fy = match &f.dy {
                            Some(v) => upsampled_field(&f, v, h, w)?,
                            None => fx.clone(),
                        };
                        (fx, fy)
                    }
                };
                let disc = Discretization {
                    dx: cx,
                    dy: cy,
                    ..a.sim.discretization().clone()
                };
                a.sim.set_discretization(disc).map_err(|e| e.to_string())?;
                Ok(vec![])
            }
            ClientMessage::SetScaleKeyframes { keyframes } => {
                let a = self.active()?;
                let scale = if keyframes.is_empty() {
                    None
                } else {
                    Some(ScaleKeyframes::new(keyframes).map_err(|e| e.to_string())?)
                };
                let disc = Discretization {
                    scale,
                    ..a.sim.discretization().clone()
                };
                a.sim.set_discretization(disc).map_err(|e| e.to_string())?;
                Ok(vec![])
            }
            ClientMessage::Perturb { x, y, radius, kind } => {
                self.perturbations += 1;
                let key = finalize(self.perturbations);
                let a = self.active()?;
                perturb(a, x, y, radius, kind, key)?;
                Ok(vec![self.frame(now)])
            }
            ClientMessage::SetFrameEvery { k } => {
                if k == 0 {
                    return Err("k must be positive".into());
                }
                self.frame_every = k;
                Ok(vec![])
            }
            ClientMessage::Pause => {
                self.active()?;
                self.paused = true;
                Ok(vec![self.stats(now)])
            }
            ClientMessage::Resume => {
                self.active()?;
                self.paused = false;
                self.stats_at = Some(now);
                self.stats_steps = 0;
                Ok(vec![])
            }
            ClientMessage::Reset => {
                let a = self.active()?;
                let disc = a.sim.discretization().clone();
                let mut sim = Simulator::from_spec(&a.spec).map_err(|e| e.to_string())?;
                sim.set_discretization(disc).map_err(|e| e.to_string())?;
                a.sim = sim;
                self.restart_counters(now);
                Ok(vec![self.frame(now)])
            }
            ClientMessage::Snapshot => {
                let a = self.active()?;
                let grid = a.sim.grid();
                let b64 = base64::engine::general_purpose::STANDARD;
                let state = encode_state(grid).map_err(|e| e.to_string())?;
                let png = encode_png(&rgb_of(grid)).map_err(|e| e.to_string())?;
                Ok(vec![Outbound::Message(ServerMessage::Snapshot {
                    step: a.sim.steps_taken(),
                    t: a.sim.time(),
                    state: b64.encode(state),
                    png: b64.encode(png),
                })])
            }
        }
    }

    fn build(
        &self,
        weights_id: &str,
        size: Option<SizeSpec>,
        variant: Option<String>,
        eps: Option<f64>,
        rng_seed: Option<u64>,
        dt: Option<f64>,
    ) -> Result<Active, String> {
        let mut weights = (*self
            .store
            .get(weights_id)
            .ok_or_else(|| format!("unknown weights_id {weights_id:?}"))?)
        .clone();
        if let Some(v) = variant {
            let v: Variant = v.parse().map_err(|e: nca_core::Error| e.to_string())?;
            if v != weights.variant {
                weights = weights.with_variant(v);
            }
        }
        let (h, w) = match size {
            None => (128, 128),
            Some(SizeSpec::Pair([h, w])) => (h, w),
            Some(SizeSpec::Text(s)) => parse_size(&s).map_err(|e| e.to_string())?,
        };
        if h > self.config.max_side || w > self.config.max_side {
            return Err(format!("grid sides are limited to {}", self.config.max_side));
        }
        let shape = GridShape::new(h, w, weights.channels).map_err(|e| e.to_string())?;
        let mut spec = SimSpec::for_rule(weights, shape, f64::MAX);
        let eps = eps.unwrap_or(DEFAULT_EPSILON);
        if spec.seed.mode == SeedMode::UniformNoise {
            spec.seed.epsilon = eps;
        }
        spec.seed.rng_seed = rng_seed.unwrap_or(0);
        spec.mask_rng_seed = rng_seed.unwrap_or(0);
        if let Some(dt) = dt {
            spec.disc.dt = dt;
        }
        let sim = Simulator::from_spec(&spec).map_err(|e| e.to_string())?;
        Ok(Active { spec, sim, eps })
    }

    fn restart_counters(&mut self, now: Instant) {
        self.steps_since_frame = 0;
        self.last_frame = None;
        self.stats_at = Some(now);
        self.stats_steps = 0;
        self.log_sum = 0.0;
        self.log_count = 0;
        self.last_dt = 0.0;
    }

    fn frame(&mut self, now: Instant) -> Outbound {
        let sim = &self.active.as_ref().expect("frame needs a simulation").sim;
        self.frame_seq += 1;
        self.steps_since_frame = 0;
        self.last_frame = Some(now);
        Outbound::Frame {
            meta: ServerMessage::Frame {
                seq: self.frame_seq,
                step: sim.steps_taken(),
                t: sim.time(),
                dt: self.last_dt,
            },
            pixels: rgba8_frame(sim.grid()),
        }
    }

    fn stats(&mut self, now: Instant) -> Outbound {
        let elapsed = self.stats_at.map_or(0.0, |t| now.duration_since(t).as_secs_f64());
        let steps_per_sec = if elapsed > 0.0 {
            self.stats_steps as f64 / elapsed
        } else {
            0.0
        };
        self.stats_at = Some(now);
        self.stats_steps = 0;
        let sim = &self.active.as_ref().expect("stats need a simulation").sim;
        Outbound::Message(ServerMessage::Stats {
            t: sim.time(),
            step: sim.steps_taken(),
            dt: sim.discretization().dt,
            steps_per_sec,
            lambda_running: (self.log_count > 0).then(|| self.log_sum / self.log_count as f64),
            paused: self.paused,
        })
    }

    /// Takes one step when running, then emits a frame and stats when due.
    pub fn tick(&mut self, now: Instant) -> Vec<Outbound> {
        let mut out = Vec::new();
        if !self.is_running() {
            return out;
        }
        let a = self.active.as_mut().expect("running implies active");
        let dt = a.sim.discretization().dt;
        match a.sim.advance(dt) {
            Ok(report) => {
                self.last_dt = report.dt;
                self.log_sum += if report.residual_rms > 0.0 {
                    report.residual_rms.ln()
                } else {
                    LOG_FLOOR
                };
                self.log_count += 1;
                self.steps_since_frame += 1;
                self.stats_steps += 1;
            }
            Err(e) => {
                self.paused = true;
                out.push(error(format!(
                    "simulation stopped: {e}; send reset or adjust dt and resume"
                )));
                out.push(self.stats(now));
                return out;
            }
        }
        let min_gap = Duration::from_secs_f64(1.0 / self.config.max_fps.max(1e-3));
        let frame_due = self.steps_since_frame >= self.frame_every
            && self.last_frame.is_none_or(|t| now.duration_since(t) >= min_gap);
        if frame_due {
            out.push(self.frame(now));
        }
        if self
            .stats_at
            .is_none_or(|t| now.duration_since(t) >= self.config.stats_interval)
        {
            out.push(self.stats(now));
        }
        out
    }
}

fn upsampled_field(f: &FieldPayload, values: &[f32], h: usize, w: usize) -> Result<CellSize, String> {
    if values.len() != f.height * f.width {
        return Err(format!(
            "field has {} values, expected {}",
            values.len(),
            f.height * f.width
        ));
    }
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h {
        let row = &values[y * f.height / h * f.width..][..f.width];
        out.extend((0..w).map(|x| row[x * f.width / w]));
    }
    CellSize::field(h, w, out).map_err(|e| e.to_string())
}

fn perturb(a: &mut Active, x: usize, y: usize, radius: f64, kind: PerturbKind, key: u64) -> Result<(), String> {
    let (h, w) = (a.sim.grid().height(), a.sim.grid().width());
    if x >= w || y >= h {
        return Err(format!("({x}, {y}) is outside the {h}x{w} grid"));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err("radius must be finite and non-negative".into());
    }
    let wrap = a.spec.weights.padding == Padding::Circular;
    let axis = |p: usize, c: usize, n: usize| {
        let d = p.abs_diff(c) as f64;
        if wrap {
            d.min(n as f64 - d)
        } else {
            d
        }
    };
    let seed = a.spec.seed.rng_seed ^ key;
    let eps = a.eps;
    a.sim.edit_grid(|g| {
        for cy in 0..h {
            let dy = axis(cy, y, h);
            if dy > radius {
                continue;
            }
            for cx in 0..w {
                let dx = axis(cx, x, w);
                if dx * dx + dy * dy > radius * radius {
                    continue;
                }
                for (ch, v) in g.cell_mut(cx, cy).iter_mut().enumerate() {
                    *v = match kind {
                        PerturbKind::Zero => 0.0,
                        PerturbKind::ReseedNoise => cell_symmetric(seed, cx, cy, ch, eps),
                    };
                }
            }
        }
    });
    Ok(())
}

/// Input to a session thread.
#[derive(Debug, Clone)]
pub enum Incoming {
    Text(String),
    Message(ClientMessage),
}

/// Client side of a session thread. Dropping the command sender (or the
/// handle) stops the thread.
pub struct SessionHandle {
    pub commands: mpsc::Sender<Incoming>,
    pub messages: async_mpsc::UnboundedReceiver<ServerMessage>,
    /// `(frame message, RGBA frame)`; bounded, frames that do not fit are
    /// dropped.
    pub frames: async_mpsc::Receiver<(ServerMessage, Vec<u8>)>,
    pub thread: thread::JoinHandle<()>,
}

/// Runs a session on a dedicated thread.
pub fn spawn(store: WeightStore, config: SessionConfig) -> SessionHandle {
    let (cmd_tx, cmd_rx) = mpsc::channel::<Incoming>();
    let (msg_tx, msg_rx) = async_mpsc::unbounded_channel();
    let (frame_tx, frame_rx) = async_mpsc::channel(config.frame_queue.max(1));
    let thread = thread::Builder::new()
        .name("nca-session".into())
        .spawn(move || {
            let mut session = Session::new(store, config);
            loop {
                let incoming = if session.is_running() {
                    match cmd_rx.try_recv() {
                        Ok(m) => Some(m),
                        Err(mpsc::TryRecvError::Empty) => None,
                        Err(mpsc::TryRecvError::Disconnected) => break,
                    }
                } else {
                    match cmd_rx.recv() {
                        Ok(m) => Some(m),
                        Err(_) => break,
                    }
                };
                let now = Instant::now();
                let out = match incoming {
                    Some(Incoming::Text(t)) => session.handle_text(&t, now),
                    Some(Incoming::Message(m)) => session.handle(m, now),
                    None => session.tick(now),
                };
                for item in out {
                    let alive = match item {
                        Outbound::Message(m) => msg_tx.send(m).is_ok(),
                        Outbound::Frame { meta, pixels } => match frame_tx.try_send((meta, pixels)) {
                            Ok(()) | Err(async_mpsc::error::TrySendError::Full(_)) => true,
                            Err(async_mpsc::error::TrySendError::Closed(_)) => false,
                        },
                    };
                    if !alive {
                        return;
                    }
                }
            }
        })
        .expect("spawning session thread");
    SessionHandle {
        commands: cmd_tx,
        messages: msg_rx,
        frames: frame_rx,
        thread,
    }
}
