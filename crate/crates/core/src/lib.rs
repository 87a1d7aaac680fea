//! Neural cellular automata treated as discretized PDEs.
//!
//! The update rule of a texture NCA is read as an Euler step of
//! `∂S/∂t = f(S, ∇x S, ∇y S, ∇² S)`. This crate keeps the time step and the
//! cell size as free parameters at inference time: perception stencils are
//! rescaled by the local cell size, integrators advance in PDE time units, and
//! the analysis toolkit (discretization sweeps, quiescent-state search and
//! Lyapunov estimation) works on the same machinery.
//!
//! The crate is `no_std` + `alloc`. The `parallel` feature (default) pulls in
//! `std` and `rayon` and parallelizes per-cell work; results are bitwise
//! identical with or without it.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adaptation;
pub mod analysis;
pub mod construct;
pub mod discretization;
pub mod dynamics;
mod error;
pub mod grid;
pub mod perception;
pub mod rng;
pub mod weights;

mod par;

pub use adaptation::{residual, Network, UpdateField};
pub use discretization::{CellSize, Discretization, ScaleKeyframes};
pub use dynamics::{
    make_seed, simulate, step, Integrator, SeedMode, SeedSpec, SimSpec, Simulator, StepReport, StepScheduler,
    Trajectory,
};
pub use error::{Error, Result};
pub use grid::{rgb_of, CellGrid, GridShape, Image};
pub use perception::{perceive, FilterBank, PerceptionField};
pub use weights::{Padding, RuleWeights, Variant};
