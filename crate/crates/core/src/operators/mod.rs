//! Linear operators of the forward model and the regularizers: the 2D DFT,
//! k-space sampling, forward differences and their adjoints, and a power
//! iteration for the norm of the stacked primal-dual operator.

mod fourier;
mod gradient;
mod norm;
mod sampling;

pub use fourier::{adjoint_op, dft_forward, dft_inverse, forward_op, Fft2d, FourierSampling};
pub use gradient::{divergence, divergence_into, gradient, gradient_into};
pub use norm::{operator_norm_estimate, OperatorBlocks, NORM_MAX_ITERATIONS, NORM_REL_TOL};
pub use sampling::{sample, sample_adjoint, PatternFrame, SamplingPattern};
