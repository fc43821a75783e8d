//! Front end for `gaussgeo`: parameter sweeps, finite-size scaling fits,
//! single-point geometry and spectrum reports, and an oracle self-check.
//!
//! Every subcommand reads a flat key-value configuration (see [`config`]),
//! overlays command-line flags, validates the result into a spec and writes
//! CSV or JSON.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod models;
pub mod oracle;
pub mod output;
pub mod spec;

pub use error::CliError;

/// Version string written into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
