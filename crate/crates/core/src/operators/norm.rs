use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fourier::FourierSampling;
use super::gradient::{divergence, gradient};
use super::sampling::SamplingPattern;
use crate::error::{Error, Result};
use crate::types::{norm_sqr, Image, C64};

pub const NORM_REL_TOL: f64 = 1e-3;
pub const NORM_MAX_ITERATIONS: usize = 100;

/// Which rows the stacked primal-dual operator carries for one frame acting
/// on `(u, z)`:
///
/// * `data_scale = Some(s)`: `s * K_t u`
/// * `gradient`: `grad u`
/// * `icb_split`: `grad (u - z)` and `grad z`
///
/// Temporal coupling is handled inside the primal prox and is not part of the
/// operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorBlocks {
    pub data_scale: Option<f64>,
    pub gradient: bool,
    pub icb_split: bool,
}

impl OperatorBlocks {
    pub fn gradient_only() -> Self {
        Self { data_scale: None, gradient: true, icb_split: false }
    }

    pub fn fourier_only(scale: f64) -> Self {
        Self { data_scale: Some(scale), gradient: false, icb_split: false }
    }

    pub fn is_empty(&self) -> bool {
        self.data_scale.is_none() && !self.gradient && !self.icb_split
    }
}

struct Stack<'a> {
    op: FourierSampling,
    pattern: &'a SamplingPattern,
    frames: Range<usize>,
    blocks: OperatorBlocks,
    dims: (usize, usize),
}

impl Stack<'_> {
    /// `x -> L^H L x` for one frame's `(u, z)` pair.
    fn normal(&self, t: usize, u: &Image, z: &Image) -> Result<(Image, Image)> {
        let (h, w) = self.dims;
        let mut out_u = Image::zeros(h, w);
        let mut out_z = Image::zeros(h, w);
        if let Some(s) = self.blocks.data_scale {
            let idx = self.pattern.indices(t)?;
            let y = self.op.forward_op(u, idx)?;
            let back = self.op.adjoint_op(&y, idx)?;
            out_u = out_u.add_scaled(s * s, &back)?;
        }
        if self.blocks.gradient {
            out_u = out_u.add_scaled(-1.0, &divergence(&gradient(u)))?;
        }
        if self.blocks.icb_split {
            let g3 = gradient(&u.sub(z)?);
            let g4 = gradient(z);
            let d3 = divergence(&g3);
            let d4 = divergence(&g4);
            out_u = out_u.add_scaled(-1.0, &d3)?;
            out_z = out_z.add_scaled(1.0, &d3)?.add_scaled(-1.0, &d4)?;
        }
        Ok((out_u, out_z))
    }
}

/// Power iteration for the spectral norm of the stacked operator over the
/// frames in `frames`. Stops when the estimate changes by less than
/// [`NORM_REL_TOL`] (relative) or after [`NORM_MAX_ITERATIONS`] steps.
pub fn operator_norm_estimate(
    pattern: &SamplingPattern,
    frames: Range<usize>,
    blocks: OperatorBlocks,
) -> Result<f64> {
    if frames.is_empty() || frames.end > pattern.frame_count() {
        return Err(Error::InvalidParameter(format!(
            "frame range {frames:?} must be nonempty and within {} frames",
            pattern.frame_count()
        )));
    }
    if blocks.is_empty() {
        return Ok(0.0);
    }
    let (h, w) = pattern.dims();
    let stack = Stack {
        op: FourierSampling::new(h, w),
        pattern,
        frames: frames.clone(),
        blocks,
        dims: (h, w),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut rand_image = |active: bool| {
        if active {
            Image::from_fn(h, w, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        } else {
            Image::zeros(h, w)
        }
    };
    let mut xs: Vec<(Image, Image)> = stack
        .frames
        .clone()
        .map(|_| (rand_image(true), rand_image(blocks.icb_split)))
        .collect();
    normalize(&mut xs);

    let mut estimate = 0.0;
    for _ in 0..NORM_MAX_ITERATIONS {
        let mut next = Vec::with_capacity(xs.len());
        for (t, (u, z)) in stack.frames.clone().zip(&xs) {
            next.push(stack.normal(t, u, z)?);
        }
        let len = normalize(&mut next);
        // ||L^H L x|| with ||x|| = 1 approaches ||L||^2 from below.
        let new_estimate = len.sqrt();
        xs = next;
        if len == 0.0 {
            return Ok(0.0);
        }
        let done = estimate > 0.0 && ((new_estimate - estimate) / new_estimate).abs() < NORM_REL_TOL;
        estimate = new_estimate;
        if done {
            break;
        }
    }
    Ok(estimate)
}

fn normalize(xs: &mut [(Image, Image)]) -> f64 {
    let total: f64 = xs
        .iter()
        .map(|(u, z)| norm_sqr(u.as_slice()) + norm_sqr(z.as_slice()))
        .sum::<f64>()
        .sqrt();
    if total > 0.0 {
        for (u, z) in xs.iter_mut() {
            u.as_mut_slice().iter_mut().for_each(|v| *v /= total);
            z.as_mut_slice().iter_mut().for_each(|v| *v /= total);
        }
    }
    total
}
