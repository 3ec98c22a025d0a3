//! Fixtures shared by the benchmarks: the 109x91 grid with the default
//! golden-angle sampling.

use dynrecon_core::sim::{simulate, PhantomSpec, SimulatedDataset};

pub const HEIGHT: usize = 109;
pub const WIDTH: usize = 91;

/// The default dataset truncated to `frames` frames.
pub fn dataset(frames: usize) -> SimulatedDataset {
    let spec = PhantomSpec { frames, ..PhantomSpec::default() };
    simulate(&spec).expect("default phantom spec is valid")
}
