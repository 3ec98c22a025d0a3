//! Raw complex arrays: little-endian `f64` (re, im) pairs, row-major, frames
//! concatenated, with a JSON sidecar carrying shape and a SHA-256 of the
//! payload.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dynrecon_core::{Image, ImageSequence, KSpaceData, SamplingPattern, SubgradientField, VectorField, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const DTYPE: &str = "c64le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMeta {
    pub dtype: String,
    pub height: usize,
    pub width: usize,
    pub frames: usize,
    /// Complex values per frame.
    pub lengths: Vec<usize>,
    pub sha256: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| CliError::io(path, e))?))
}

/// `x.c64` -> `x.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn encode(frames: &[&[C64]]) -> Vec<u8> {
    let n: usize = frames.iter().map(|f| f.len()).sum();
    let mut out = Vec::with_capacity(16 * n);
    for v in frames.iter().flat_map(|f| f.iter()) {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Option<Vec<C64>> {
    if bytes.len() % 16 != 0 {
        return None;
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8 bytes"));
    Some(bytes.chunks_exact(16).map(|c| C64::new(f(&c[..8]), f(&c[8..]))).collect())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn write_raw(
    path: &Path,
    height: usize,
    width: usize,
    frames: &[&[C64]],
    attrs: BTreeMap<String, f64>,
) -> Result<RawMeta> {
    let bytes = encode(frames);
    let meta = RawMeta {
        dtype: DTYPE.into(),
        height,
        width,
        frames: frames.len(),
        lengths: frames.iter().map(|f| f.len()).collect(),
        sha256: sha256_hex(&bytes),
        attrs,
    };
    write_file(path, &bytes)?;
    write_json(&sidecar_path(path), &meta)?;
    Ok(meta)
}

/// Reads and checks a raw file against its sidecar.
pub fn read_raw(path: &Path) -> Result<(RawMeta, Vec<Vec<C64>>)> {
    let meta: RawMeta = read_json(&sidecar_path(path))?;
    if meta.dtype != DTYPE {
        return Err(CliError::format(path, format!("dtype '{}', expected '{DTYPE}'", meta.dtype)));
    }
    if meta.lengths.len() != meta.frames {
        return Err(CliError::format(path, "frame count and length list disagree"));
    }
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    if sha256_hex(&bytes) != meta.sha256 {
        return Err(CliError::format(path, "content hash does not match the sidecar"));
    }
    let total: usize = meta.lengths.iter().sum();
    let values = decode(&bytes)
        .filter(|v| v.len() == total)
        .ok_or_else(|| CliError::format(path, format!("payload is not {total} complex values")))?;
    let mut frames = Vec::with_capacity(meta.frames);
    let mut rest = values.as_slice();
    for &len in &meta.lengths {
        let (head, tail) = rest.split_at(len);
        frames.push(head.to_vec());
        rest = tail;
    }
    Ok((meta, frames))
}

pub fn write_sequence(path: &Path, seq: &ImageSequence) -> Result<RawMeta> {
    let (h, w) = seq.dims();
    let frames: Vec<&[C64]> = seq.iter().map(|f| f.as_slice()).collect();
    write_raw(path, h, w, &frames, BTreeMap::new())
}

pub fn read_sequence(path: &Path) -> Result<ImageSequence> {
    let (meta, frames) = read_raw(path)?;
    let images = frames
        .into_iter()
        .map(|f| Image::new(meta.height, meta.width, f))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::format(path, e.to_string()))?;
    ImageSequence::new(images).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn write_image(path: &Path, image: &Image) -> Result<RawMeta> {
    write_raw(path, image.height(), image.width(), &[image.as_slice()], BTreeMap::new())
}

pub fn read_image(path: &Path) -> Result<Image> {
    let seq = read_sequence(path)?;
    if seq.len() != 1 {
        return Err(CliError::format(path, format!("expected one frame, found {}", seq.len())));
    }
    Ok(seq.into_frames().remove(0))
}

pub fn write_kspace(path: &Path, data: &KSpaceData) -> Result<RawMeta> {
    let (h, w) = data.dims();
    let frames: Vec<&[C64]> = data.frames().iter().map(|f| f.as_slice()).collect();
    write_raw(path, h, w, &frames, BTreeMap::new())
}

pub fn read_kspace(path: &Path, pattern: SamplingPattern) -> Result<KSpaceData> {
    let (meta, frames) = read_raw(path)?;
    if (meta.height, meta.width) != pattern.dims() {
        return Err(CliError::format(path, "grid differs from the sampling pattern"));
    }
    Ok(KSpaceData::new(pattern, frames)?)
}

/// Two frames, `q0.dx` then `q0.dy`; the threshold travels in `attrs.eta`.
pub fn write_subgradient(path: &Path, sub: &SubgradientField) -> Result<RawMeta> {
    let (h, w) = sub.dims();
    let q0 = sub.q0();
    let attrs = BTreeMap::from([("eta".to_string(), sub.eta())]);
    write_raw(path, h, w, &[&q0.dx, &q0.dy], attrs)
}

pub fn read_subgradient(path: &Path) -> Result<SubgradientField> {
    let (meta, mut frames) = read_raw(path)?;
    if frames.len() != 2 {
        return Err(CliError::format(path, "a subgradient file holds exactly two frames"));
    }
    let eta = *meta.attrs.get("eta").ok_or_else(|| CliError::format(path, "sidecar lacks attrs.eta"))?;
    let dy = frames.pop().expect("two frames");
    let dx = frames.pop().expect("two frames");
    let q0 = VectorField::new(meta.height, meta.width, dx, dy).map_err(|e| CliError::format(path, e.to_string()))?;
    Ok(SubgradientField::from_field(q0, eta)?)
}
