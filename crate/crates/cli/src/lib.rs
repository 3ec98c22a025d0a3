//! File formats, configuration and batch commands around `dynrecon-core`.
//!
//! A typical session chains `simulate`, `recon-prior`, `recon` (once per
//! method) and `eval`; every output directory ends with a `manifest.json`
//! holding content hashes of what was read and written.

pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod pgm;
pub mod rawio;
pub mod table;

pub use cli::{execute, run_from, Cli, Command, Overrides};
pub use config::{MethodConfig, PriorConfig, RunConfig, Weights};
pub use error::{Category, CliError, Result};
