//! Control messages (JSON text, tagged by `op`) and server replies.
//!
//! Binary frames carry `u32` width, `u32` height (little-endian) and RGBA8
//! pixels. Each frame is preceded by a `frame` text message with its
//! simulation time and step count.

use serde::{Deserialize, Serialize};

/// Grid size as `"HxW"` or `[H, W]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SizeSpec {
    Text(String),
    Pair([usize; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMode {
    Uniform,
    Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbKind {
    ReseedNoise,
    Zero,
}

/// Per-cell sizes for `set_cell_size` with `mode: "field"`; row-major
/// `height × width`. `dy` defaults to `dx`. A field coarser than the grid
/// is upsampled by nearest neighbor.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FieldPayload {
    pub height: usize,
    pub width: usize,
    pub dx: Vec<f32>,
    #[serde(default)]
    pub dy: Option<Vec<f32>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Start {
        weights_id: String,
        #[serde(default)]
        size: Option<SizeSpec>,
        #[serde(default)]
        variant: Option<String>,
        #[serde(default)]
        eps: Option<f64>,
        #[serde(default)]
        rng_seed: Option<u64>,
        #[serde(default)]
        dt: Option<f64>,
    },
    SetDt {
        value: f64,
    },
    SetCellSize {
        mode: CellMode,
        #[serde(default)]
        dx: Option<f32>,
        #[serde(default)]
        dy: Option<f32>,
        #[serde(default)]
        field: Option<FieldPayload>,
    },
    /// `[[t, m], …]`; an empty list removes the schedule.
    SetScaleKeyframes {
        keyframes: Vec<(f64, f32)>,
    },
    Perturb {
        x: usize,
        y: usize,
        radius: f64,
        kind: PerturbKind,
    },
    /// Send a frame at most every `k` steps.
    SetFrameEvery {
        k: u64,
    },
    Pause,
    Resume,
    Reset,
    Snapshot,
}

impl ClientMessage {
    pub fn op(&self) -> &'static str {
        match self {
            ClientMessage::Start { .. } => "start",
            ClientMessage::SetDt { .. } => "set_dt",
            ClientMessage::SetCellSize { .. } => "set_cell_size",
            ClientMessage::SetScaleKeyframes { .. } => "set_scale_keyframes",
            ClientMessage::Perturb { .. } => "perturb",
            ClientMessage::SetFrameEvery { .. } => "set_frame_every",
            ClientMessage::Pause => "pause",
            ClientMessage::Resume => "resume",
            ClientMessage::Reset => "reset",
            ClientMessage::Snapshot => "snapshot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ServerMessage {
    /// A session started; the simulation is running.
    Ready {
        width: usize,
        height: usize,
        channels: usize,
        variant: String,
        dt: f64,
    },
    /// A control message was applied. `step` and `t` give the state at
    /// which it takes effect: the next step starts there.
    Ack {
        of: String,
        step: u64,
        t: f64,
    },
    /// Metadata of the binary frame that follows.
    Frame {
        seq: u64,
        step: u64,
        t: f64,
        /// Step size of the last step taken.
        dt: f64,
    },
    Stats {
        t: f64,
        step: u64,
        dt: f64,
        steps_per_sec: f64,
        /// Mean log-RMS of the update field over the steps since start or
        /// reset; `null` before the first step.
        lambda_running: Option<f64>,
        paused: bool,
    },
    /// Full state (snapshot file format) and an RGB PNG, both base64.
    Snapshot {
        step: u64,
        t: f64,
        state: String,
        png: String,
    },
    Error {
        message: String,
    },
}
