use std::ops::Range;

use crate::error::{Error, Result};

/// A contiguous block of frames; `link` is the last frame of the previous
/// block, whose reconstruction is held fixed and coupled to `range.start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub range: Range<usize>,
    pub link: Option<usize>,
}

/// Partitions `0..frames` into consecutive blocks of at most `size` frames.
pub fn chunk_schedule(frames: usize, size: usize) -> Result<Vec<Chunk>> {
    if size == 0 {
        return Err(Error::InvalidParameter("chunk size must be >= 1".into()));
    }
    Ok((0..frames)
        .step_by(size)
        .map(|start| Chunk {
            range: start..(start + size).min(frames),
            link: start.checked_sub(1),
        })
        .collect())
}
