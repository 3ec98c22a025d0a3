//! Shared domain types: complex images, image sequences, gradient fields and
//! measured k-space data, plus the real inner product every operator is
//! adjoint under.
//!
//! Pixels are stored row-major: the pixel at row `y`, column `x` lives at
//! linear index `y * width + x`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::SamplingPattern;
use crate::solver::{StepSizes, StoppingRule};

pub type C64 = Complex64;

/// Real part of the Hermitian dot product, `Re(sum conj(a_i) * b_i)`.
pub fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Types carrying the real inner product `Re <u, v>`.
pub trait InnerProduct {
    fn inner(&self, other: &Self) -> Result<f64>;

    fn norm(&self) -> f64
    where
        Self: Sized,
    {
        self.inner(self).map(f64::sqrt).unwrap_or(0.0)
    }
}

/// `Re(sum conj(u_i) v_i)` for images, vector fields or plain k-space vectors.
pub fn inner_product<T: InnerProduct + ?Sized>(u: &T, v: &T) -> Result<f64> {
    u.inner(v)
}

impl InnerProduct for [C64] {
    fn inner(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::dims(self.len(), other.len()));
        }
        Ok(real_dot(self, other))
    }
}

impl InnerProduct for Vec<C64> {
    fn inner(&self, other: &Self) -> Result<f64> {
        self.as_slice().inner(other.as_slice())
    }
}

/// A complex image of `height` (N1) rows and `width` (N2) columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<C64>,
}

impl Image {
    pub fn new(height: usize, width: usize, data: Vec<C64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if data.len() != height * width {
            return Err(Error::dims(
                format!("{} pixels ({height}x{width})", height * width),
                format!("{} pixels", data.len()),
            ));
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(format!("image pixel {i}")));
        }
        Ok(Self { height, width, data })
    }

    /// Builds an image without the finiteness scan. Used on hot solver paths
    /// where the inputs are already known to be valid.
    pub(crate) fn from_parts(height: usize, width: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        Self { height, width, data }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::from_parts(height, width, vec![C64::new(0.0, 0.0); height * width])
    }

    pub fn constant(height: usize, width: usize, value: C64) -> Self {
        Self::from_parts(height, width, vec![value; height * width])
    }

    pub fn from_real(height: usize, width: usize, values: &[f64]) -> Result<Self> {
        Self::new(height, width, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Self::from_parts(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, y: usize, x: usize) -> C64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, y: usize, x: usize, value: C64) {
        self.data[y * self.width + x] = value;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm()).collect()
    }

    pub fn norm_l2(&self) -> f64 {
        norm_sqr(&self.data).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self::from_parts(self.height, self.width, self.data.iter().map(|z| z * c).collect())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::from_parts(self.height, self.width, self.data.iter().map(|&z| f(z)).collect())
    }

    /// Elementwise `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Image) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_parts(
            self.height,
            self.width,
            self.data.iter().zip(&other.data).map(|(a, b)| a + b * c).collect(),
        ))
    }

    pub fn sub(&self, other: &Image) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    pub(crate) fn check_same(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(
                format!("{}x{}", self.height, self.width),
                format!("{}x{}", other.height, other.width),
            ));
        }
        Ok(())
    }
}

impl InnerProduct for Image {
    fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(real_dot(&self.data, &other.data))
    }
}

/// Ordered stack of frames sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSequence {
    frames: Vec<Image>,
}

impl ImageSequence {
    pub fn new(frames: Vec<Image>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidParameter("an image sequence needs at least one frame".into()))?;
        let dims = first.dims();
        for (t, f) in frames.iter().enumerate() {
            if f.dims() != dims {
                return Err(Error::dims(
                    format!("{}x{} (frame 0)", dims.0, dims.1),
                    format!("{}x{} (frame {t})", f.height(), f.width()),
                ));
            }
        }
        Ok(Self { frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    pub fn frames(&self) -> &[Image] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> &Image {
        &self.frames[t]
    }

    pub fn into_frames(self) -> Vec<Image> {
        self.frames
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Image> {
        self.frames.iter()
    }
}

/// Forward differences of an image: `dx` along columns, `dy` along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    height: usize,
    width: usize,
    pub dx: Vec<C64>,
    pub dy: Vec<C64>,
}

impl VectorField {
    pub fn new(height: usize, width: usize, dx: Vec<C64>, dy: Vec<C64>) -> Result<Self> {
        let n = height * width;
        if dx.len() != n || dy.len() != n {
            return Err(Error::dims(
                format!("{n} entries per component"),
                format!("{} and {}", dx.len(), dy.len()),
            ));
        }
        Ok(Self { height, width, dx, dy })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        let n = height * width;
        Self {
            height,
            width,
            dx: vec![C64::new(0.0, 0.0); n],
            dy: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn constant(height: usize, width: usize, dx: C64, dy: C64) -> Self {
        let n = height * width;
        Self { height, width, dx: vec![dx; n], dy: vec![dy; n] }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.dx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dx.is_empty()
    }

    /// Per-pixel Euclidean magnitude over the four real components.
    pub fn magnitude_at(&self, i: usize) -> f64 {
        (self.dx[i].norm_sqr() + self.dy[i].norm_sqr()).sqrt()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.magnitude_at(i)).collect()
    }

    /// `max_i |w_i|`, the dual norm of the isotropic 1-norm.
    pub fn max_magnitude(&self) -> f64 {
        (0..self.len()).map(|i| self.magnitude_at(i)).fold(0.0, f64::max)
    }

    /// Isotropic 1-norm `sum_i |w_i|`.
    pub fn l1_norm(&self) -> f64 {
        (0..self.len()).map(|i| self.magnitude_at(i)).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        (norm_sqr(&self.dx) + norm_sqr(&self.dy)).sqrt()
    }

    pub fn add_scaled(&self, c: f64, other: &VectorField) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            height: self.height,
            width: self.width,
            dx: self.dx.iter().zip(&other.dx).map(|(a, b)| a + b * c).collect(),
            dy: self.dy.iter().zip(&other.dy).map(|(a, b)| a + b * c).collect(),
        })
    }

    fn check_same(&self, other: &VectorField) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(
                format!("{}x{}", self.height, self.width),
                format!("{}x{}", other.height, other.width),
            ));
        }
        Ok(())
    }
}

impl InnerProduct for VectorField {
    fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(real_dot(&self.dx, &other.dx) + real_dot(&self.dy, &other.dy))
    }
}

/// Measured samples `f_t`, one vector per frame, together with the pattern
/// that selected them.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceData {
    pattern: SamplingPattern,
    frames: Vec<Vec<C64>>,
}

impl KSpaceData {
    pub fn new(pattern: SamplingPattern, frames: Vec<Vec<C64>>) -> Result<Self> {
        if frames.len() != pattern.frame_count() {
            return Err(Error::dims(
                format!("{} frames", pattern.frame_count()),
                format!("{} frames", frames.len()),
            ));
        }
        for (t, f) in frames.iter().enumerate() {
            if f.len() != pattern.samples(t) {
                return Err(Error::dims(
                    format!("{} samples in frame {t}", pattern.samples(t)),
                    format!("{}", f.len()),
                ));
            }
            if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite(format!("k-space frame {t}")));
            }
        }
        Ok(Self { pattern, frames })
    }

    pub fn pattern(&self) -> &SamplingPattern {
        &self.pattern
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, t: usize) -> &[C64] {
        &self.frames[t]
    }

    pub fn frames(&self) -> &[Vec<C64>] {
        &self.frames
    }

    pub fn dims(&self) -> (usize, usize) {
        self.pattern.dims()
    }

    /// Restricts to the frames in `range`, keeping their pattern entries.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        let pattern = self.pattern.slice(range.clone())?;
        Ok(Self { pattern, frames: self.frames[range].to_vec() })
    }
}

/// Reconstruction approaches compared in the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Frame-wise minimum-norm least squares.
    Ls,
    /// Frame-wise TV-regularized least squares.
    Tv,
    /// Temporal Tikhonov smoothing only.
    Temp,
    /// Temporal smoothing plus spatial TV.
    TempTv,
    /// Temporal smoothing plus TV and the structural prior coupling.
    Icbtv,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Ls, Method::Tv, Method::Temp, Method::TempTv, Method::Icbtv];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ls => "ls",
            Method::Tv => "tv",
            Method::Temp => "temp",
            Method::TempTv => "temp_tv",
            Method::Icbtv => "icbtv",
        }
    }

    pub fn needs_prior(self) -> bool {
        self == Method::Icbtv
    }

    pub fn is_temporal(self) -> bool {
        matches!(self, Method::Temp | Method::TempTv | Method::Icbtv)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '+'], "_").as_str() {
            "ls" => Ok(Method::Ls),
            "tv" => Ok(Method::Tv),
            "temp" => Ok(Method::Temp),
            "temp_tv" | "temptv" => Ok(Method::TempTv),
            "icbtv" | "icb_tv" | "proposed" => Ok(Method::Icbtv),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

/// Weights and numerical settings of one reconstruction run.
///
/// `gamma[t]` couples frames `t` and `t + 1`; the entry for the last frame is
/// ignored (the boundary weight is zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub w: Vec<f64>,
    pub steps: StepSizes,
    pub stopping: StoppingRule,
    pub chunk_size: usize,
    /// Conjugate-gradient iterations for [`Method::Ls`].
    pub ls_iterations: usize,
}

impl MethodSpec {
    pub const DEFAULT_CHUNK: usize = 10;
    pub const DEFAULT_LS_ITERATIONS: usize = 50;
    pub const DEFAULT_W: f64 = 0.1;

    /// Constant weights over `frames` frames with default numerics.
    pub fn constant(method: Method, frames: usize, alpha: f64, gamma: f64, w: f64) -> Self {
        Self {
            method,
            alpha: vec![alpha; frames],
            gamma: vec![gamma; frames],
            w: vec![w; frames],
            steps: StepSizes::Auto,
            stopping: StoppingRule::default(),
            chunk_size: Self::DEFAULT_CHUNK,
            ls_iterations: Self::DEFAULT_LS_ITERATIONS,
        }
    }

    pub fn frames(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self, frames: usize) -> Result<()> {
        for (name, v) in [("alpha", &self.alpha), ("gamma", &self.gamma), ("w", &self.w)] {
            if v.len() != frames {
                return Err(Error::dims(format!("{frames} {name} weights"), v.len()));
            }
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {a}")));
        }
        if let Some(g) = self.gamma.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {g}")));
        }
        if let Some(w) = self.w.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidParameter(format!("w must lie in [0, 1], got {w}")));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidParameter("chunk size must be >= 1".into()));
        }
        self.steps.validate()?;
        self.stopping.validate()?;
        Ok(())
    }

    /// The weights restricted to `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            alpha: self.alpha[range.clone()].to_vec(),
            gamma: self.gamma[range.clone()].to_vec(),
            w: self.w[range].to_vec(),
            ..self.clone()
        }
    }
}
