//! Primal-dual solvers: the TV reconstruction of the prior, the dynamic
//! reconstruction with temporal smoothing and structural coupling, the
//! least-squares baseline, stopping rules and temporal chunking.
//!
//! Data fidelity is measured in the isometric k-space scaling
//! `A_t = sqrt(N) K_t`, `f~_t = sqrt(N) f_t`, so `A_t` has norm one under
//! full sampling and `||A_t u - f~_t||` equals the image-domain residual.
//! The iterates coincide with the textbook listing that uses the inverse DFT
//! as the adjoint of the normalized forward DFT.

mod chunk;
mod ls;
mod primal_dual;
mod prior;

pub use chunk::{chunk_schedule, Chunk};
pub use ls::ls_reconstruct;
pub use primal_dual::{
    energy_value, pd_residual, reconstruct_dynamic, ChunkResult, FrameState, PrimalDual, Problem, SolverState,
    WarmFrame,
};
pub use prior::{reconstruct_prior, PriorResult, PriorSolver};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularization::SubgradientField;
use crate::types::{Image, ImageSequence, KSpaceData, Method, MethodSpec};

/// When to stop a primal-dual run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    /// Relative energy change between consecutive iterates.
    pub energy_rel_tol: f64,
    /// Size-normalized primal-dual residual.
    pub residual_tol: f64,
    /// Iterations between checks.
    pub check_interval: usize,
    pub max_iterations: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            energy_rel_tol: 1e-6,
            residual_tol: 1e-4,
            check_interval: 10,
            max_iterations: 5000,
        }
    }
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_rel_tol > 0.0) || !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter("stopping tolerances must be > 0".into()));
        }
        if self.check_interval == 0 {
            return Err(Error::InvalidParameter("check interval must be >= 1".into()));
        }
        Ok(())
    }

    pub(crate) fn is_met(&self, energy_change: f64, residual: f64) -> bool {
        energy_change < self.energy_rel_tol && residual < self.residual_tol
    }
}

/// Primal and dual step sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum StepSizes {
    /// `tau = sigma = 0.99 / L` with `L` estimated by power iteration.
    Auto,
    /// `tau = 0.99 sqrt(ratio) / L`, `sigma = 0.99 / (sqrt(ratio) L)`; same
    /// product as `Auto`, shifted toward the dual when `ratio < 1`.
    Balanced { ratio: f64 },
    Fixed { tau: f64, sigma: f64 },
}

impl StepSizes {
    pub const AUTO_FACTOR: f64 = 0.99;

    pub fn validate(&self) -> Result<()> {
        if let StepSizes::Balanced { ratio } = *self {
            if !(ratio > 0.0 && ratio.is_finite()) {
                return Err(Error::InvalidParameter(format!("step ratio must be positive, got {ratio}")));
            }
        }
        if let StepSizes::Fixed { tau, sigma } = *self {
            if !(tau > 0.0 && sigma > 0.0 && tau.is_finite() && sigma.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "step sizes must be positive, got tau = {tau}, sigma = {sigma}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn resolve(&self, norm: impl FnOnce() -> Result<f64>) -> Result<(f64, f64, Option<f64>)> {
        match *self {
            StepSizes::Fixed { tau, sigma } => Ok((tau, sigma, None)),
            StepSizes::Auto => {
                let l = norm()?;
                let s = if l > 0.0 { Self::AUTO_FACTOR / l } else { 1.0 };
                Ok((s, s, Some(l)))
            }
            StepSizes::Balanced { ratio } => {
                let l = norm()?;
                let s = if l > 0.0 { Self::AUTO_FACTOR / l } else { 1.0 };
                let r = ratio.sqrt();
                Ok((s * r, s / r, Some(l)))
            }
        }
    }
}

/// One convergence check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub chunk: usize,
    pub iteration: usize,
    pub energy: f64,
    pub residual: f64,
}

/// Summary of one chunk's run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkSummary {
    pub start: usize,
    pub end: usize,
    pub link: Option<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub tau: f64,
    pub sigma: f64,
    pub operator_norm: Option<f64>,
    pub energy: f64,
    pub residual: f64,
}

/// Output of [`reconstruct`].
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub sequence: ImageSequence,
    pub method: Method,
    pub converged: bool,
    pub chunks: Vec<ChunkSummary>,
    pub history: Vec<ConvergenceRecord>,
}

/// Runs `spec.method` on all frames of `data`, chunking the time axis when
/// it is longer than `spec.chunk_size`. Each chunk after the first is coupled
/// to the last reconstructed frame of its predecessor.
pub fn reconstruct(data: &KSpaceData, spec: &MethodSpec, sub: Option<&SubgradientField>) -> Result<Reconstruction> {
    let frames = data.frame_count();
    spec.validate(frames)?;
    if spec.method == Method::Ls {
        let mut images = Vec::with_capacity(frames);
        for t in 0..frames {
            images.push(ls_reconstruct(data.frame(t), data.pattern(), t, spec.ls_iterations)?);
        }
        return Ok(Reconstruction {
            sequence: ImageSequence::new(images)?,
            method: spec.method,
            converged: true,
            chunks: Vec::new(),
            history: Vec::new(),
        });
    }

    let mut images: Vec<Image> = Vec::with_capacity(frames);
    let mut chunks = Vec::new();
    let mut history = Vec::new();
    for (ci, chunk) in chunk_schedule(frames, spec.chunk_size)?.into_iter().enumerate() {
        let chunk_data = data.slice(chunk.range.clone())?;
        let chunk_spec = spec.slice(chunk.range.clone());
        let warm = match chunk.link {
            Some(link) if spec.method.is_temporal() => Some(WarmFrame {
                image: images[link].clone(),
                gamma: spec.gamma[link],
            }),
            _ => None,
        };
        log::debug!("chunk {ci}: frames {:?}", chunk.range);
        let result = reconstruct_dynamic(&chunk_data, &chunk_spec, sub, warm)?;
        history.extend(result.history.iter().map(|r| ConvergenceRecord { chunk: ci, ..*r }));
        chunks.push(ChunkSummary {
            start: chunk.range.start,
            end: chunk.range.end,
            link: chunk.link,
            iterations: result.iterations,
            converged: result.converged,
            tau: result.tau,
            sigma: result.sigma,
            operator_norm: result.operator_norm,
            energy: result.energy,
            residual: result.residual,
        });
        images.extend(result.sequence.into_frames());
    }
    Ok(Reconstruction {
        sequence: ImageSequence::new(images)?,
        method: spec.method,
        converged: chunks.iter().all(|c| c.converged),
        chunks,
        history,
    })
}
