//! Command-line front end for the peakon laboratory: configuration files,
//! simulation runs, verification suites and parameter sweeps.

pub mod config;
pub mod error;
pub mod output;
pub mod simulate;
pub mod svg;
pub mod sweep;
pub mod verify;

pub use config::{parse_config, render, RunConfig};
pub use error::CliError;
