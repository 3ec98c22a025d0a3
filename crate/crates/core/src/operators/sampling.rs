use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Image, C64};

/// Selected k-space coefficients of one frame, with the spoke angles that
/// produced them (empty for Cartesian patterns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternFrame {
    pub indices: Vec<usize>,
    #[serde(default)]
    pub angles_deg: Vec<f64>,
}

impl PatternFrame {
    pub fn new(indices: Vec<usize>) -> Self {
        Self { indices, angles_deg: Vec::new() }
    }

    pub fn with_angles(indices: Vec<usize>, angles_deg: Vec<f64>) -> Self {
        Self { indices, angles_deg }
    }
}

#[derive(Deserialize)]
struct RawPattern {
    height: usize,
    width: usize,
    frames: Vec<PatternFrame>,
}

/// Per-frame injective maps from sample number to linear DFT index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPattern")]
pub struct SamplingPattern {
    height: usize,
    width: usize,
    frames: Vec<PatternFrame>,
}

impl TryFrom<RawPattern> for SamplingPattern {
    type Error = Error;

    fn try_from(raw: RawPattern) -> Result<Self> {
        SamplingPattern::new(raw.height, raw.width, raw.frames)
    }
}

impl SamplingPattern {
    pub fn new(height: usize, width: usize, frames: Vec<PatternFrame>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Pattern(format!("grid must be nonempty, got {height}x{width}")));
        }
        let n = height * width;
        let mut seen = vec![usize::MAX; n];
        for (t, frame) in frames.iter().enumerate() {
            for &i in &frame.indices {
                if i >= n {
                    return Err(Error::Pattern(format!(
                        "frame {t}: index {i} outside the {height}x{width} grid"
                    )));
                }
                if seen[i] == t {
                    return Err(Error::Pattern(format!("frame {t}: duplicate index {i}")));
                }
                seen[i] = t;
            }
        }
        Ok(Self { height, width, frames })
    }

    /// Full Cartesian sampling in linear order, one frame.
    pub fn identity(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            frames: vec![PatternFrame::new((0..height * width).collect())],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn grid_len(&self) -> usize {
        self.height * self.width
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> &[PatternFrame] {
        &self.frames
    }

    /// `M_t`, the number of samples in frame `t`.
    pub fn samples(&self, t: usize) -> usize {
        self.frames.get(t).map_or(0, |f| f.indices.len())
    }

    pub fn indices(&self, t: usize) -> Result<&[usize]> {
        self.frames
            .get(t)
            .map(|f| f.indices.as_slice())
            .ok_or_else(|| Error::Pattern(format!("frame {t} out of range ({} frames)", self.frames.len())))
    }

    pub fn angles(&self, t: usize) -> &[f64] {
        self.frames.get(t).map_or(&[], |f| f.angles_deg.as_slice())
    }

    /// `M_t / (N1 N2)`.
    pub fn sampled_fraction(&self, t: usize) -> f64 {
        self.samples(t) as f64 / self.grid_len() as f64
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.frames.len() || range.start > range.end {
            return Err(Error::Pattern(format!(
                "frame range {range:?} outside {} frames",
                self.frames.len()
            )));
        }
        Ok(Self {
            height: self.height,
            width: self.width,
            frames: self.frames[range].to_vec(),
        })
    }
}

/// `(S F)_k = F_{P(k)}`.
pub fn sample(spectrum: &Image, indices: &[usize]) -> Result<Vec<C64>> {
    let data = spectrum.as_slice();
    indices
        .iter()
        .map(|&i| {
            data.get(i)
                .copied()
                .ok_or_else(|| Error::Pattern(format!("index {i} outside grid of {} coefficients", data.len())))
        })
        .collect()
}

/// Zero-filled spectrum carrying `z_k` at `P(k)`.
pub fn sample_adjoint(z: &[C64], indices: &[usize], height: usize, width: usize) -> Result<Image> {
    if z.len() != indices.len() {
        return Err(Error::dims(format!("{} samples", indices.len()), z.len()));
    }
    let mut out = Image::zeros(height, width);
    let data = out.as_mut_slice();
    for (&i, &v) in indices.iter().zip(z) {
        *data
            .get_mut(i)
            .ok_or_else(|| Error::Pattern(format!("index {i} outside grid of {} coefficients", height * width)))? = v;
    }
    Ok(out)
}
