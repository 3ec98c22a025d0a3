//! 16-bit binary PGM (P5) for magnitude images. Values are scaled linearly
//! from `[min, max]` onto `[0, 65535]`; the range is returned so callers can
//! record it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::rawio::write_file;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgmRange {
    pub min: f64,
    pub max: f64,
}

pub fn encode_pgm16(values: &[f64], height: usize, width: usize) -> (Vec<u8>, PgmRange) {
    assert_eq!(values.len(), height * width, "pgm payload size");
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(2 * values.len());
    for &v in values {
        let level = if span > 0.0 { ((v - min) / span * 65535.0).round() as u16 } else { 0 };
        out.extend_from_slice(&level.to_be_bytes());
    }
    (out, PgmRange { min, max })
}

pub fn write_pgm16(path: &Path, values: &[f64], height: usize, width: usize) -> Result<PgmRange> {
    let (bytes, range) = encode_pgm16(values, height, width);
    write_file(path, &bytes)?;
    Ok(range)
}

/// Parses a P5 file with maxval 65535; returns `(height, width, levels)`.
pub fn decode_pgm16(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let bad = |m: &str| CliError::format(path, m.to_string());
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header is not ASCII"))?);
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return Err(bad("not a 16-bit P5 image"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad("bad width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("bad height"))?;
    let raster = bytes.get(pos..).filter(|r| r.len() == 2 * width * height).ok_or_else(|| bad("raster size"))?;
    let levels = raster.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
    Ok((height, width, levels))
}
