//! Realtime steering service: one simulation per websocket connection.
//!
//! Routes:
//! - `GET /ws`: websocket session (JSON control messages, binary frames),
//! - `GET /weights`: JSON list of available weight files,
//! - `PUT /weights/{id}`: upload an NCAW file (raw body).
//!
//! When a token is configured every request must carry `?token=<token>`.

pub mod protocol;
mod server;
pub mod session;
pub mod store;

pub use server::{router, serve, ServiceConfig};
pub use session::{spawn, Incoming, Outbound, Session, SessionConfig, SessionHandle};
pub use store::{WeightInfo, WeightStore};
