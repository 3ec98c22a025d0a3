//! Run configuration: one JSON file plus command-line overrides.

use std::path::{Path, PathBuf};

use dynrecon_core::eval::RoiSpec;
use dynrecon_core::sim::PhantomSpec;
use dynrecon_core::{Method, MethodSpec, StepSizes, StoppingRule};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// A weight given once for all frames or per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Constant(f64),
    PerFrame(Vec<f64>),
}

impl Weights {
    pub fn expand(&self, frames: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            Weights::Constant(v) => Ok(vec![*v; frames]),
            Weights::PerFrame(v) if v.len() == frames => Ok(v.clone()),
            Weights::PerFrame(v) => Err(CliError::Config(format!("{name} lists {} values for {frames} frames", v.len()))),
        }
    }
}

/// Step sizes of both solvers unless configured. The data terms dominate
/// the operator norm, so a small primal step converges much faster than
/// equal steps.
pub const DEFAULT_STEPS: StepSizes = StepSizes::Balanced { ratio: 0.01 };

/// `(alpha, gamma)` used when the config leaves them unset.
pub fn default_weights(method: Method) -> (f64, f64) {
    match method {
        Method::Ls => (1.0, 0.0),
        Method::Tv => (50.0, 0.0),
        Method::Temp => (1.0, 1.0),
        Method::TempTv => (500.0, 500.0),
        Method::Icbtv => (50.0, 25.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodConfig {
    pub method: Method,
    pub alpha: Option<Weights>,
    pub gamma: Option<Weights>,
    pub w: Weights,
    pub steps: StepSizes,
    pub stopping: StoppingRule,
    pub chunk_size: usize,
    pub ls_iterations: usize,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            method: Method::Icbtv,
            alpha: None,
            gamma: None,
            w: Weights::Constant(MethodSpec::DEFAULT_W),
            steps: DEFAULT_STEPS,
            stopping: StoppingRule::default(),
            chunk_size: MethodSpec::DEFAULT_CHUNK,
            ls_iterations: MethodSpec::DEFAULT_LS_ITERATIONS,
        }
    }
}

impl MethodConfig {
    pub fn to_spec(&self, frames: usize) -> Result<MethodSpec> {
        let (a, g) = default_weights(self.method);
        let alpha = self.alpha.clone().unwrap_or(Weights::Constant(a)).expand(frames, "alpha")?;
        let gamma = self.gamma.clone().unwrap_or(Weights::Constant(g)).expand(frames, "gamma")?;
        let spec = MethodSpec {
            method: self.method,
            alpha,
            gamma,
            w: self.w.expand(frames, "w")?,
            steps: self.steps,
            stopping: self.stopping,
            chunk_size: self.chunk_size,
            ls_iterations: self.ls_iterations,
        };
        spec.validate(frames)?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorConfig {
    pub alpha: f64,
    /// Edge threshold for the subgradient.
    pub eta: f64,
    pub steps: StepSizes,
    pub stopping: StoppingRule,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self { alpha: 20.0, eta: 0.05, steps: DEFAULT_STEPS, stopping: StoppingRule::default() }
    }
}

/// Co-registered contrast images in the raw format, one frame each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalPair {
    pub prior: PathBuf,
    pub dynamic: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Empty means the defaults derived from the dataset's phantom.
    pub rois: Vec<RoiSpec>,
    pub baseline_frames: usize,
    /// First frame of the post-peak window for the variance metric.
    pub tail_from: usize,
    /// Margin around the activated region for zoom crops.
    pub zoom_margin: usize,
    pub write_images: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { rois: Vec::new(), baseline_frames: 3, tail_from: 41, zoom_margin: 8, write_images: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Dataset directory read by every command after `simulate`.
    pub dataset: Option<PathBuf>,
    /// Directory written by `recon-prior`, read by ICBTV runs.
    pub prior: Option<PathBuf>,
    /// Result directories compared by `eval`.
    pub results: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub phantom: PhantomSpec,
    pub external: Option<ExternalPair>,
    pub method: MethodConfig,
    pub prior_recon: PriorConfig,
    pub eval: EvalConfig,
    pub sweep_gammas: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            prior: None,
            results: Vec::new(),
            out: None,
            phantom: PhantomSpec::default(),
            external: None,
            method: MethodConfig::default(),
            prior_recon: PriorConfig::default(),
            eval: EvalConfig::default(),
            sweep_gammas: vec![5.0, 25.0, 100.0],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| CliError::Config("an output directory is required (--out)".into()))
    }

    pub fn dataset_dir(&self) -> Result<&Path> {
        self.dataset.as_deref().ok_or_else(|| CliError::Missing("no dataset directory given (--dataset)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn round_trips_through_json() {
        let mut c = RunConfig::default();
        c.method.alpha = Some(Weights::PerFrame(vec![1.0, 2.0]));
        c.method.steps = StepSizes::Balanced { ratio: 0.01 };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn unset_weights_follow_the_method() {
        let mut m = MethodConfig { method: Method::TempTv, ..Default::default() };
        let spec = m.to_spec(4).unwrap();
        assert_eq!(spec.alpha, vec![500.0; 4]);
        assert_eq!(spec.gamma, vec![500.0; 4]);
        m.gamma = Some(Weights::Constant(3.0));
        assert_eq!(m.to_spec(4).unwrap().gamma, vec![3.0; 4]);
    }

    #[test]
    fn per_frame_length_is_checked() {
        let m = MethodConfig { alpha: Some(Weights::PerFrame(vec![1.0; 3])), ..Default::default() };
        assert!(matches!(m.to_spec(4), Err(CliError::Config(_))));
    }

    #[test]
    fn invalid_weights_are_rejected() {
        let m = MethodConfig { w: Weights::Constant(1.5), ..Default::default() };
        assert!(m.to_spec(2).is_err());
    }
}
