//! Time-curve extraction and error metrics on magnitude images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Rect;
use crate::types::ImageSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RoiKind {
    Rectangle { rect: Rect },
    Pixels { pixels: Vec<(usize, usize)> },
    /// Column `x`, rows `top .. top + length`.
    VerticalLine { x: usize, top: usize, length: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiSpec {
    pub label: String,
    #[serde(flatten)]
    pub kind: RoiKind,
}

impl RoiSpec {
    pub fn rectangle(label: impl Into<String>, rect: Rect) -> Self {
        Self { label: label.into(), kind: RoiKind::Rectangle { rect } }
    }

    pub fn pixels(label: impl Into<String>, pixels: Vec<(usize, usize)>) -> Self {
        Self { label: label.into(), kind: RoiKind::Pixels { pixels } }
    }

    pub fn vertical_line(label: impl Into<String>, x: usize, top: usize, length: usize) -> Self {
        Self { label: label.into(), kind: RoiKind::VerticalLine { x, top, length } }
    }

    /// Pixel coordinates `(row, column)`, checked against the grid.
    pub fn coordinates(&self, height: usize, width: usize) -> Result<Vec<(usize, usize)>> {
        let pixels = match &self.kind {
            RoiKind::Rectangle { rect } => rect.pixels(),
            RoiKind::Pixels { pixels } => pixels.clone(),
            RoiKind::VerticalLine { x, top, length } => (*top..top + length).map(|y| (y, *x)).collect(),
        };
        if pixels.is_empty() {
            return Err(Error::InvalidParameter(format!("region '{}' is empty", self.label)));
        }
        if let Some(&(y, x)) = pixels.iter().find(|&&(y, x)| y >= height || x >= width) {
            return Err(Error::InvalidParameter(format!(
                "region '{}': pixel ({y}, {x}) outside the {height}x{width} grid",
                self.label
            )));
        }
        Ok(pixels)
    }
}

/// Mean magnitude over the region, one value per frame.
pub fn roi_mean_curve(seq: &ImageSequence, roi: &RoiSpec) -> Result<Vec<f64>> {
    let (h, w) = seq.dims();
    let pixels = roi.coordinates(h, w)?;
    let n = pixels.len() as f64;
    Ok(seq
        .iter()
        .map(|f| pixels.iter().map(|&(y, x)| f.get(y, x).norm()).sum::<f64>() / n)
        .collect())
}

/// Magnitude time series, `out[t][p]` for pixel `p`.
pub fn pixel_curves(seq: &ImageSequence, pixels: &[(usize, usize)]) -> Result<Vec<Vec<f64>>> {
    let (h, w) = seq.dims();
    let pixels = RoiSpec::pixels("pixels", pixels.to_vec()).coordinates(h, w)?;
    Ok(seq
        .iter()
        .map(|f| pixels.iter().map(|&(y, x)| f.get(y, x).norm()).collect())
        .collect())
}

/// Magnitude along the region over time, `out[position][t]`.
pub fn roi_line_map(seq: &ImageSequence, roi: &RoiSpec) -> Result<Vec<Vec<f64>>> {
    let (h, w) = seq.dims();
    let pixels = roi.coordinates(h, w)?;
    Ok(pixels
        .iter()
        .map(|&(y, x)| seq.iter().map(|f| f.get(y, x).norm()).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveMetrics {
    pub rmse: f64,
    pub peak_value: f64,
    pub peak_frame: usize,
    /// `None` when either curve is constant.
    pub correlation: Option<f64>,
}

pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (saa > 0.0 && sbb > 0.0).then(|| (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Compares a reconstructed curve with the true one. The peak refers to the
/// reconstructed curve.
pub fn curve_metrics(recon: &[f64], truth: &[f64]) -> Result<CurveMetrics> {
    if recon.len() != truth.len() {
        return Err(Error::dims(format!("{} samples", truth.len()), recon.len()));
    }
    if recon.is_empty() {
        return Err(Error::InvalidParameter("curves are empty".into()));
    }
    let rmse = (recon.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / recon.len() as f64).sqrt();
    let (peak_frame, peak_value) = recon
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(CurveMetrics { rmse, peak_value, peak_frame, correlation: pearson(recon, truth) })
}

/// Curve maximum above the mean of its first `baseline_frames` values.
pub fn peak_amplitude(curve: &[f64], baseline_frames: usize) -> f64 {
    let k = baseline_frames.clamp(1, curve.len().max(1));
    let base = curve.iter().take(k).sum::<f64>() / k as f64;
    curve.iter().copied().fold(f64::NEG_INFINITY, f64::max) - base
}

/// Root-mean-square magnitude error over all region pixels and frames.
pub fn roi_rmse(recon: &ImageSequence, truth: &ImageSequence, roi: &RoiSpec) -> Result<f64> {
    if recon.len() != truth.len() || recon.dims() != truth.dims() {
        return Err(Error::dims(
            format!("{} frames of {}x{}", truth.len(), truth.dims().0, truth.dims().1),
            format!("{} frames of {}x{}", recon.len(), recon.dims().0, recon.dims().1),
        ));
    }
    let (h, w) = truth.dims();
    let pixels = roi.coordinates(h, w)?;
    let mut sum = 0.0;
    for (a, b) in recon.iter().zip(truth.iter()) {
        for &(y, x) in &pixels {
            sum += (a.get(y, x).norm() - b.get(y, x).norm()).powi(2);
        }
    }
    Ok((sum / (pixels.len() * truth.len()) as f64).sqrt())
}

/// Sample variance of `curve[from..]`.
pub fn tail_variance(curve: &[f64], from: usize) -> f64 {
    let tail = &curve[from.min(curve.len())..];
    if tail.len() < 2 {
        return 0.0;
    }
    let n = tail.len() as f64;
    let m = tail.iter().sum::<f64>() / n;
    tail.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
}
