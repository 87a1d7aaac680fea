//! Files, command-line tools and the realtime steering service built on
//! `nca-core`.

pub mod cli;
pub mod io;
pub mod report;
pub mod service;
pub mod syntax;
