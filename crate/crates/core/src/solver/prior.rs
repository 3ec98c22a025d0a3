use super::primal_dual::PrimalDual;
use super::{ConvergenceRecord, StepSizes, StoppingRule};
use crate::error::{Error, Result};
use crate::operators::SamplingPattern;
use crate::types::{Image, KSpaceData, Method, MethodSpec, VectorField, C64};

/// Output of [`reconstruct_prior`].
#[derive(Debug, Clone)]
pub struct PriorResult {
    pub image: Image,
    pub converged: bool,
    pub iterations: usize,
    pub history: Vec<ConvergenceRecord>,
    /// Data dual in the isometric scaling.
    pub y1: Vec<C64>,
    /// TV dual, `|y2| <= 1` pointwise.
    pub y2: VectorField,
    pub tau: f64,
    pub sigma: f64,
}

/// Single-frame TV reconstruction `min (alpha0/2)||K0 u - f0||^2 + TV(u)`,
/// which is the dynamic solver with one frame and no temporal or structural
/// terms.
#[derive(Debug, Clone)]
pub struct PriorSolver {
    inner: PrimalDual,
}

impl PriorSolver {
    pub fn new(f0: &[C64], pattern0: &SamplingPattern, alpha0: f64, stopping: StoppingRule, steps: StepSizes) -> Result<Self> {
        if pattern0.frame_count() != 1 {
            return Err(Error::Pattern(format!(
                "the prior pattern must have exactly one frame, got {}",
                pattern0.frame_count()
            )));
        }
        let data = KSpaceData::new(pattern0.clone(), vec![f0.to_vec()])?;
        let mut spec = MethodSpec::constant(Method::Tv, 1, alpha0, 0.0, 1.0);
        spec.steps = steps;
        spec.stopping = stopping;
        Ok(Self { inner: PrimalDual::new(&data, &spec, None, None)? })
    }

    pub fn iterate(&mut self) {
        self.inner.iterate();
    }

    pub fn image(&self) -> &Image {
        &self.inner.state().frames[0].u
    }

    pub fn inner(&self) -> &PrimalDual {
        &self.inner
    }

    pub fn run(self) -> Result<PriorResult> {
        let result = self.inner.run()?;
        let frame = result.state.frames.into_iter().next().expect("one frame");
        Ok(PriorResult {
            image: frame.u,
            converged: result.converged,
            iterations: result.iterations,
            history: result.history,
            y1: frame.y1,
            y2: frame.y2.expect("TV dual present"),
            tau: result.tau,
            sigma: result.sigma,
        })
    }
}

/// Reconstructs the anatomical prior from single-frame data.
pub fn reconstruct_prior(
    f0: &[C64],
    pattern0: &SamplingPattern,
    alpha0: f64,
    stopping: StoppingRule,
    steps: StepSizes,
) -> Result<PriorResult> {
    PriorSolver::new(f0, pattern0, alpha0, stopping, steps)?.run()
}
