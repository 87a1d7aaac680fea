//! Measurement toolkit: discretization sweeps scored by an appearance proxy,
//! quiescent-state search, and maximal Lyapunov exponent estimation.

pub mod fixed_point;
pub mod lyapunov;
pub mod sweep;
pub mod texture;

pub use fixed_point::{find_fixed_point, FixedPointOptions, FixedPointResult};
pub use lyapunov::{estimate_mle, MleEstimate};
pub use sweep::{log_spaced, sweep_dt, sweep_dx, SweepAxis, SweepEntry, SweepReport};
pub use texture::{resize_bilinear, texture_distance, GramEmbedding};
