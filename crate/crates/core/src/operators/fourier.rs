use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::sampling::{sample, sample_adjoint, SamplingPattern};
use crate::error::{Error, Result};
use crate::types::{Image, C64};

/// Planned 2D transform on a fixed `height x width` grid.
///
/// The forward transform carries the `1 / (N1 N2)` factor and the inverse is
/// unnormalized, so `inverse(forward(u)) == u`. DC sits at linear index 0.
#[derive(Clone)]
pub struct Fft2d {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2d")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

impl Fft2d {
    pub fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn transform(&self, data: &mut [C64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        let (h, w) = (self.height, self.width);
        debug_assert_eq!(data.len(), h * w);
        let mut scratch =
            vec![Complex64::new(0.0, 0.0); rows.get_inplace_scratch_len().max(cols.get_inplace_scratch_len())];
        rows.process_with_scratch(data, &mut scratch[..rows.get_inplace_scratch_len()]);

        let mut transposed = vec![Complex64::new(0.0, 0.0); h * w];
        for y in 0..h {
            for x in 0..w {
                transposed[x * h + y] = data[y * w + x];
            }
        }
        cols.process_with_scratch(&mut transposed, &mut scratch[..cols.get_inplace_scratch_len()]);
        for x in 0..w {
            for y in 0..h {
                data[y * w + x] = transposed[x * h + y];
            }
        }
    }

    pub fn forward_in_place(&self, data: &mut [C64]) {
        self.transform(data, &self.row_fwd, &self.col_fwd);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    pub fn inverse_in_place(&self, data: &mut [C64]) {
        self.transform(data, &self.row_inv, &self.col_inv);
    }

    fn check(&self, img: &Image) -> Result<()> {
        if img.dims() != self.dims() {
            return Err(Error::dims(
                format!("{}x{}", self.height, self.width),
                format!("{}x{}", img.height(), img.width()),
            ));
        }
        Ok(())
    }

    pub fn forward(&self, u: &Image) -> Result<Image> {
        self.check(u)?;
        let mut data = u.as_slice().to_vec();
        self.forward_in_place(&mut data);
        Ok(Image::from_parts(self.height, self.width, data))
    }

    pub fn inverse(&self, spectrum: &Image) -> Result<Image> {
        self.check(spectrum)?;
        let mut data = spectrum.as_slice().to_vec();
        self.inverse_in_place(&mut data);
        Ok(Image::from_parts(self.height, self.width, data))
    }
}

/// Normalized forward DFT (`1 / (N1 N2)` prefactor).
pub fn dft_forward(u: &Image) -> Image {
    let (h, w) = u.dims();
    Fft2d::new(h, w).forward(u).expect("planned on the image grid")
}

/// Unnormalized inverse DFT, the exact inverse of [`dft_forward`].
pub fn dft_inverse(spectrum: &Image) -> Image {
    let (h, w) = spectrum.dims();
    Fft2d::new(h, w).inverse(spectrum).expect("planned on the image grid")
}

/// The forward operator `K_t = S_t F` and its exact adjoint on one grid.
#[derive(Debug, Clone)]
pub struct FourierSampling {
    fft: Fft2d,
}

impl FourierSampling {
    pub fn new(height: usize, width: usize) -> Self {
        Self { fft: Fft2d::new(height, width) }
    }

    pub fn fft(&self) -> &Fft2d {
        &self.fft
    }

    pub fn dims(&self) -> (usize, usize) {
        self.fft.dims()
    }

    /// `S_t F u`: the DFT restricted to the sampled indices.
    pub fn forward_op(&self, u: &Image, indices: &[usize]) -> Result<Vec<C64>> {
        let spectrum = self.fft.forward(u)?;
        sample(&spectrum, indices)
    }

    /// Adjoint of [`Self::forward_op`] under the real inner product:
    /// zero-fill, inverse DFT, and divide by `N1 N2` (the inverse DFT is `N`
    /// times the adjoint of the normalized forward DFT).
    pub fn adjoint_op(&self, z: &[C64], indices: &[usize]) -> Result<Image> {
        let (h, w) = self.fft.dims();
        let mut filled = sample_adjoint(z, indices, h, w)?.into_vec();
        self.fft.inverse_in_place(&mut filled);
        let scale = 1.0 / self.fft.len() as f64;
        filled.iter_mut().for_each(|v| *v *= scale);
        Ok(Image::from_parts(h, w, filled))
    }
}

pub fn forward_op(u: &Image, pattern: &SamplingPattern, t: usize) -> Result<Vec<C64>> {
    check_grid(u.dims(), pattern)?;
    let (h, w) = pattern.dims();
    FourierSampling::new(h, w).forward_op(u, pattern.indices(t)?)
}

pub fn adjoint_op(z: &[C64], pattern: &SamplingPattern, t: usize) -> Result<Image> {
    let (h, w) = pattern.dims();
    FourierSampling::new(h, w).adjoint_op(z, pattern.indices(t)?)
}

fn check_grid(dims: (usize, usize), pattern: &SamplingPattern) -> Result<()> {
    if dims != pattern.dims() {
        return Err(Error::dims(
            format!("{}x{} pattern grid", pattern.dims().0, pattern.dims().1),
            format!("{}x{} image", dims.0, dims.1),
        ));
    }
    Ok(())
}
