use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dynrecon_core::Method;

use crate::commands;
use crate::config::{RunConfig, Weights};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "dynrecon", version, about = "Dynamic MRI reconstruction with an anatomical prior")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Generate a phantom, its sampling pattern and noisy k-space data.
    Simulate,
    /// Reconstruct the anatomical prior and extract its subgradient.
    ReconPrior,
    /// Reconstruct the dynamic sequence with one method.
    Recon,
    /// Curves, metrics and magnitude images for one or more results.
    Eval,
    /// Reconstruct and evaluate over a list of temporal weights.
    Sweep,
}

/// Flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub method: Option<Method>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// One value, or a comma-separated list for `sweep`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    #[arg(long, global = true)]
    pub w: Option<f64>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub chunk: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,
    #[arg(long, global = true)]
    pub prior: Option<PathBuf>,
    /// Result directory for `eval`; repeatable.
    #[arg(long = "result", global = true)]
    pub results: Vec<PathBuf>,
}

impl Overrides {
    pub fn resolve(&self, command: Command) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.method {
            cfg.method.method = m;
        }
        if let Some(a) = self.alpha {
            cfg.method.alpha = Some(Weights::Constant(a));
        }
        match (command, self.gamma.as_slice()) {
            (_, []) => {}
            (Command::Sweep, gs) => cfg.sweep_gammas = gs.to_vec(),
            (_, [g]) => cfg.method.gamma = Some(Weights::Constant(*g)),
            (_, _) => return Err(CliError::Usage("a list of gamma values is only accepted by sweep".into())),
        }
        if let Some(w) = self.w {
            cfg.method.w = Weights::Constant(w);
        }
        if let Some(eta) = self.eta {
            cfg.prior_recon.eta = eta;
        }
        if let Some(seed) = self.seed {
            cfg.phantom.seed = seed;
        }
        if let Some(c) = self.chunk {
            cfg.method.chunk_size = c;
        }
        for (slot, value) in [(&mut cfg.out, &self.out), (&mut cfg.dataset, &self.dataset), (&mut cfg.prior, &self.prior)] {
            if value.is_some() {
                slot.clone_from(value);
            }
        }
        if !self.results.is_empty() {
            cfg.results = self.results.clone();
        }
        Ok(cfg)
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<PathBuf> {
    match command {
        Command::Simulate => commands::cmd_simulate(cfg),
        Command::ReconPrior => commands::cmd_recon_prior(cfg),
        Command::Recon => commands::cmd_recon(cfg),
        Command::Eval => commands::cmd_eval(cfg),
        Command::Sweep => commands::cmd_sweep(cfg),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<PathBuf>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg = cli.overrides.resolve(cli.command)?;
    execute(cli.command, &cfg)
}
