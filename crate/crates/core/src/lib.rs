//! Reconstruction of undersampled dynamic MRI with spatial TV, temporal
//! smoothing and an anatomical prior coupled through the infimal convolution
//! of TV Bregman distances.
//!
//! Images are row-major complex arrays, `n = y * width + x`. The forward
//! model of frame `t` is `K_t = S_t F`, with `F` the DFT normalized by
//! `1 / (height * width)` and `S_t` the selection of measured coefficients.

pub mod error;
pub mod eval;
pub mod operators;
pub mod regularization;
pub mod sim;
pub mod solver;
pub mod types;

pub use error::{Error, Result};
pub use operators::{PatternFrame, SamplingPattern};
pub use regularization::{extract_subgradient, SubgradientField};
pub use solver::{reconstruct, reconstruct_prior, Reconstruction, StepSizes, StoppingRule};
pub use types::{Image, ImageSequence, KSpaceData, Method, MethodSpec, VectorField, C64};
