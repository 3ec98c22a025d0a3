//! Synthetic fMRI-style experiment: a two-contrast phantom whose dynamic
//! contrast carries an HRF-shaped activation, golden-angle radial sampling,
//! and noisy k-space synthesis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::operators::{forward_op, PatternFrame, SamplingPattern};
use crate::types::{norm_sqr, Image, ImageSequence, KSpaceData, C64};

/// Double-gamma response `g(t; a1) - g(t; a2) / ratio` on a frame clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HrfParams {
    /// Shape of the response gamma density (seconds at unit scale).
    pub response_shape: f64,
    /// Shape of the undershoot gamma density.
    pub undershoot_shape: f64,
    pub ratio: f64,
    /// Peak value after rescaling.
    pub amplitude: f64,
    pub seconds_per_frame: f64,
    /// Frame at which the response starts; earlier frames are baseline.
    pub onset_frame: f64,
}

impl Default for HrfParams {
    fn default() -> Self {
        Self {
            response_shape: 6.0,
            undershoot_shape: 16.0,
            ratio: 6.0,
            amplitude: 0.1,
            seconds_per_frame: 0.5,
            onset_frame: 3.0,
        }
    }
}

impl HrfParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.response_shape > 1.0
            && self.undershoot_shape > 1.0
            && self.ratio > 0.0
            && self.amplitude >= 0.0
            && self.amplitude.is_finite()
            && self.seconds_per_frame > 0.0
            && self.onset_frame >= 0.0;
        if !ok {
            return Err(Error::InvalidParameter(format!("invalid HRF parameters {self:?}")));
        }
        Ok(())
    }
}

fn gamma_density(t: f64, shape: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    ((shape - 1.0) * t.ln() - t - ln_gamma(shape)).exp()
}

fn hrf_raw(t: f64, p: &HrfParams) -> f64 {
    gamma_density(t, p.response_shape) - gamma_density(t, p.undershoot_shape) / p.ratio
}

/// Location of the maximum of the unscaled response, by golden-section
/// search over the rising lobe `[0, 2 a1]` where it is unimodal.
pub fn hrf_peak_time(p: &HrfParams) -> f64 {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 2.0 * p.response_shape);
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    while b - a > 1e-12 {
        if hrf_raw(c, p) > hrf_raw(d, p) {
            b = d;
        } else {
            a = c;
        }
        c = b - invphi * (b - a);
        d = a + invphi * (b - a);
    }
    0.5 * (a + b)
}

/// Response at `t` seconds after onset, scaled so its maximum is
/// `p.amplitude`. Zero for `t <= 0`.
pub fn hrf_canonical(t: f64, p: &HrfParams) -> f64 {
    let peak = hrf_raw(hrf_peak_time(p), p);
    if p.amplitude == 0.0 || peak <= 0.0 {
        return 0.0;
    }
    hrf_raw(t, p) * (p.amplitude / peak)
}

/// HRF sampled at frames `0..frames`.
pub fn hrf_frames(frames: usize, p: &HrfParams) -> Vec<f64> {
    let peak = hrf_raw(hrf_peak_time(p), p);
    let scale = if p.amplitude == 0.0 || peak <= 0.0 { 0.0 } else { p.amplitude / peak };
    (0..frames)
        .map(|t| hrf_raw((t as f64 - p.onset_frame) * p.seconds_per_frame, p) * scale)
        .collect()
}

/// Axis-aligned pixel rectangle `[top, top + height) x [left, left + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    pub fn contains(&self, y: usize, x: usize) -> bool {
        y >= self.top && y < self.top + self.height && x >= self.left && x < self.left + self.width
    }

    pub fn fits(&self, height: usize, width: usize) -> bool {
        self.height > 0 && self.width > 0 && self.top + self.height <= height && self.left + self.width <= width
    }

    pub fn pixels(&self) -> Vec<(usize, usize)> {
        (self.top..self.top + self.height)
            .flat_map(|y| (self.left..self.left + self.width).map(move |x| (y, x)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomMode {
    /// Piecewise-constant geometric head phantom.
    Builtin,
    /// User-supplied co-registered prior and dynamic contrasts.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScope {
    /// `||e|| = fraction * ||f||` over the whole dataset.
    Global,
    /// The same ratio enforced frame by frame.
    PerFrame,
}

/// Everything needed to generate a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomSpec {
    pub height: usize,
    pub width: usize,
    pub mode: PhantomMode,
    pub roi: Rect,
    pub frames: usize,
    pub hrf: HrfParams,
    pub spokes_per_frame: usize,
    pub angle_increment_deg: f64,
    pub noise_fraction: f64,
    pub noise_scope: NoiseScope,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            height: 109,
            width: 91,
            mode: PhantomMode::Builtin,
            roi: ACTIVATED_ROI,
            frames: 60,
            hrf: HrfParams::default(),
            spokes_per_frame: 5,
            angle_increment_deg: GOLDEN_ANGLE_DEG,
            noise_fraction: 0.05,
            noise_scope: NoiseScope::Global,
            seed: 1,
        }
    }
}

pub const GOLDEN_ANGLE_DEG: f64 = 111.25;

/// Gray-matter nucleus of the builtin phantom, activated by default.
pub const ACTIVATED_ROI: Rect = Rect { top: 69, left: 41, height: 7, width: 9 };

/// Inactive white-matter patch of the builtin phantom.
pub const CONTROL_ROI: Rect = Rect { top: 26, left: 41, height: 7, width: 9 };

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::InvalidParameter("phantom grid must be nonempty".into()));
        }
        if !self.roi.fits(self.height, self.width) {
            return Err(Error::InvalidParameter(format!(
                "activation region {:?} outside the {}x{} grid",
                self.roi, self.height, self.width
            )));
        }
        if self.frames == 0 {
            return Err(Error::InvalidParameter("at least one frame is required".into()));
        }
        if self.spokes_per_frame == 0 {
            return Err(Error::InvalidParameter("at least one spoke per frame is required".into()));
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return Err(Error::InvalidParameter(format!(
                "noise fraction must lie in [0, 1), got {}",
                self.noise_fraction
            )));
        }
        if !self.angle_increment_deg.is_finite() {
            return Err(Error::InvalidParameter("angle increment must be finite".into()));
        }
        self.hrf.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tissue {
    Background,
    Scalp,
    Gray,
    White,
    Csf,
}

impl Tissue {
    /// (prior contrast, dynamic contrast); gray/white jumps flip sign.
    fn intensities(self) -> (f64, f64) {
        match self {
            Tissue::Background => (0.0, 0.0),
            Tissue::Scalp => (0.9, 0.35),
            Tissue::Gray => (0.45, 0.7),
            Tissue::White => (0.75, 0.5),
            Tissue::Csf => (0.15, 0.95),
        }
    }
}

fn inside(y: f64, x: f64, cy: f64, cx: f64, ry: f64, rx: f64) -> bool {
    let (dy, dx) = ((y - cy) / ry, (x - cx) / rx);
    dy * dy + dx * dx <= 1.0
}

/// Tissue label map of the builtin phantom, scaled from its 109x91 design.
fn tissue_at(y: usize, x: usize, height: usize, width: usize) -> Tissue {
    let sy = height as f64 / 109.0;
    let sx = width as f64 / 91.0;
    let (y, x) = (y as f64 / sy, x as f64 / sx);
    let (cy, cx) = (54.0, 45.0);
    if !inside(y, x, cy, cx, 52.0, 43.0) {
        return Tissue::Background;
    }
    if !inside(y, x, cy, cx, 47.0, 38.0) {
        return Tissue::Scalp;
    }
    if !inside(y, x, cy, cx, 41.0, 32.0) {
        return Tissue::Gray;
    }
    if inside(y, x, 44.0, 37.0, 10.0, 4.0) || inside(y, x, 44.0, 53.0, 10.0, 4.0) {
        return Tissue::Csf;
    }
    // gray nucleus; it is exactly the default activation region
    if (69.0..76.0).contains(&y) && (41.0..50.0).contains(&x) {
        return Tissue::Gray;
    }
    Tissue::White
}

/// Prior (T1-like) and dynamic (T2-like) contrasts of the builtin phantom.
/// Both are piecewise constant on the same partition.
pub fn builtin_contrasts(height: usize, width: usize) -> (Image, Image) {
    let prior = Image::from_fn(height, width, |y, x| C64::new(tissue_at(y, x, height, width).intensities().0, 0.0));
    let dynamic = Image::from_fn(height, width, |y, x| C64::new(tissue_at(y, x, height, width).intensities().1, 0.0));
    (prior, dynamic)
}

/// Prior image and ground-truth sequence for the builtin phantom.
pub fn make_phantom(spec: &PhantomSpec) -> Result<(Image, ImageSequence)> {
    if spec.mode == PhantomMode::External {
        return Err(Error::MissingInput("external phantom mode needs prior and dynamic images".into()));
    }
    spec.validate()?;
    let (prior, dynamic) = builtin_contrasts(spec.height, spec.width);
    let truth = activate(&dynamic, spec)?;
    Ok((prior, truth))
}

/// Prior image and ground-truth sequence from user-supplied contrasts.
pub fn make_phantom_from(spec: &PhantomSpec, prior: Image, dynamic: &Image) -> Result<(Image, ImageSequence)> {
    spec.validate()?;
    for img in [&prior, dynamic] {
        if img.dims() != (spec.height, spec.width) {
            return Err(Error::dims(
                format!("{}x{} contrast image", spec.height, spec.width),
                format!("{}x{}", img.height(), img.width()),
            ));
        }
    }
    let truth = activate(dynamic, spec)?;
    Ok((prior, truth))
}

fn activate(dynamic: &Image, spec: &PhantomSpec) -> Result<ImageSequence> {
    let curve = hrf_frames(spec.frames, &spec.hrf);
    let frames = curve
        .iter()
        .map(|&h| {
            let mut img = dynamic.clone();
            for (y, x) in spec.roi.pixels() {
                let v = img.get(y, x);
                img.set(y, x, v + h);
            }
            img
        })
        .collect();
    ImageSequence::new(frames)
}

/// Angle of global spoke `s`, in `[0, 180)` degrees.
pub fn spoke_angle(s: usize, increment_deg: f64) -> f64 {
    (s as f64 * increment_deg).rem_euclid(180.0)
}

/// Linear DFT indices hit by a spoke through DC at `angle_deg`, in ray order
/// with duplicates removed. Frequencies live on the centered grid
/// `[-floor(N/2), ceil(N/2))`; angle 0 runs along the horizontal frequency
/// axis.
pub fn rasterize_spoke(angle_deg: f64, height: usize, width: usize) -> Vec<usize> {
    let radius = height.max(width).div_ceil(2) as i64;
    let theta = angle_deg.to_radians();
    let (s, c) = theta.sin_cos();
    let (hy, hx) = ((height / 2) as i64, (width / 2) as i64);
    let (ty, tx) = (height.div_ceil(2) as i64, width.div_ceil(2) as i64);
    let mut out = Vec::new();
    for r in -radius..=radius {
        let ky = (r as f64 * s).round() as i64;
        let kx = (r as f64 * c).round() as i64;
        if ky < -hy || ky >= ty || kx < -hx || kx >= tx {
            continue;
        }
        let iy = ky.rem_euclid(height as i64) as usize;
        let ix = kx.rem_euclid(width as i64) as usize;
        let idx = iy * width + ix;
        if !out.contains(&idx) {
            out.push(idx);
        }
    }
    out
}

/// Golden-angle radial pattern: frame `t` holds spokes
/// `t * spokes_per_frame .. (t + 1) * spokes_per_frame`.
pub fn golden_angle_pattern(
    frames: usize,
    spokes_per_frame: usize,
    height: usize,
    width: usize,
    increment_deg: f64,
) -> Result<SamplingPattern> {
    if spokes_per_frame == 0 {
        return Err(Error::InvalidParameter("at least one spoke per frame is required".into()));
    }
    let pattern_frames = (0..frames)
        .map(|t| {
            let mut indices = Vec::new();
            let mut seen = std::collections::HashSet::new();
            let mut angles = Vec::with_capacity(spokes_per_frame);
            for j in 0..spokes_per_frame {
                let angle = spoke_angle(t * spokes_per_frame + j, increment_deg);
                angles.push(angle);
                for idx in rasterize_spoke(angle, height, width) {
                    if seen.insert(idx) {
                        indices.push(idx);
                    }
                }
            }
            PatternFrame::with_angles(indices, angles)
        })
        .collect();
    SamplingPattern::new(height, width, pattern_frames)
}

/// Stream id of the prior's noise, kept apart from the per-frame streams.
const PRIOR_STREAM: u64 = u64::MAX;

fn gaussian_noise(len: usize, seed: u64, stream: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// `f_t = K_t truth_t + e_t` with complex Gaussian noise rescaled to the
/// requested fraction of the clean signal norm.
pub fn synthesize_kspace(
    truth: &ImageSequence,
    pattern: &SamplingPattern,
    noise_fraction: f64,
    seed: u64,
) -> Result<KSpaceData> {
    synthesize_kspace_with(truth, pattern, noise_fraction, seed, NoiseScope::Global)
}

pub fn synthesize_kspace_with(
    truth: &ImageSequence,
    pattern: &SamplingPattern,
    noise_fraction: f64,
    seed: u64,
    scope: NoiseScope,
) -> Result<KSpaceData> {
    if truth.len() != pattern.frame_count() {
        return Err(Error::dims(
            format!("{} frames", pattern.frame_count()),
            format!("{} frames", truth.len()),
        ));
    }
    if truth.dims() != pattern.dims() {
        return Err(Error::dims(
            format!("{}x{} frames", pattern.dims().0, pattern.dims().1),
            format!("{}x{}", truth.dims().0, truth.dims().1),
        ));
    }
    if !(0.0..1.0).contains(&noise_fraction) {
        return Err(Error::InvalidParameter(format!("noise fraction must lie in [0, 1), got {noise_fraction}")));
    }
    let clean: Vec<Vec<C64>> = (0..truth.len())
        .into_par_iter()
        .map(|t| forward_op(truth.frame(t), pattern, t))
        .collect::<Result<_>>()?;
    if noise_fraction == 0.0 {
        return KSpaceData::new(pattern.clone(), clean);
    }
    let noise: Vec<Vec<C64>> = (0..truth.len())
        .into_par_iter()
        .map(|t| gaussian_noise(clean[t].len(), seed, t as u64))
        .collect();
    let scales: Vec<f64> = match scope {
        NoiseScope::Global => {
            let signal: f64 = clean.iter().map(|f| norm_sqr(f)).sum();
            let energy: f64 = noise.iter().map(|e| norm_sqr(e)).sum();
            let s = if energy > 0.0 { noise_fraction * (signal / energy).sqrt() } else { 0.0 };
            vec![s; clean.len()]
        }
        NoiseScope::PerFrame => clean
            .iter()
            .zip(&noise)
            .map(|(f, e)| {
                let energy = norm_sqr(e);
                if energy > 0.0 { noise_fraction * (norm_sqr(f) / energy).sqrt() } else { 0.0 }
            })
            .collect(),
    };
    let frames = clean
        .into_iter()
        .zip(noise)
        .zip(scales)
        .map(|((f, e), s)| f.iter().zip(&e).map(|(a, b)| a + b * s).collect())
        .collect();
    KSpaceData::new(pattern.clone(), frames)
}

/// A complete synthetic experiment.
#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub prior_truth: Image,
    pub truth: ImageSequence,
    /// Fully sampled prior k-space.
    pub prior_data: KSpaceData,
    pub data: KSpaceData,
}

/// Fully sampled prior data with the same relative noise level as the
/// dynamic data, drawn from a stream disjoint from the frames.
pub fn synthesize_prior(prior: &Image, noise_fraction: f64, seed: u64) -> Result<KSpaceData> {
    let (h, w) = prior.dims();
    let pattern = SamplingPattern::identity(h, w);
    let clean = forward_op(prior, &pattern, 0)?;
    let e = gaussian_noise(clean.len(), seed, PRIOR_STREAM);
    let energy = norm_sqr(&e);
    let s = if noise_fraction > 0.0 && energy > 0.0 { noise_fraction * (norm_sqr(&clean) / energy).sqrt() } else { 0.0 };
    let f = clean.iter().zip(&e).map(|(a, b)| a + b * s).collect();
    KSpaceData::new(pattern, vec![f])
}

/// Builds prior and dynamic data for `spec` from the given phantom.
pub fn simulate_from(spec: &PhantomSpec, prior: Image, truth: ImageSequence) -> Result<SimulatedDataset> {
    spec.validate()?;
    let pattern = golden_angle_pattern(spec.frames, spec.spokes_per_frame, spec.height, spec.width, spec.angle_increment_deg)?;
    let data = synthesize_kspace_with(&truth, &pattern, spec.noise_fraction, spec.seed, spec.noise_scope)?;
    let prior_data = synthesize_prior(&prior, spec.noise_fraction, spec.seed)?;
    Ok(SimulatedDataset { prior_truth: prior, truth, prior_data, data })
}

/// Builtin-phantom experiment.
pub fn simulate(spec: &PhantomSpec) -> Result<SimulatedDataset> {
    let (prior, truth) = make_phantom(spec)?;
    simulate_from(spec, prior, truth)
}
