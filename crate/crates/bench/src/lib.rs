//! Shared inputs for the benchmarks, so each bench measures the kernel and
//! not the setup.

use rankmdl_core::synth::SmoothScene;
use rankmdl_core::{DataMatrix, FrameShape};

/// Rank-3 video-like stack with 5% spikes: `side * side` pixels by `frames`.
pub fn scene(side: usize, frames: usize) -> DataMatrix {
    SmoothScene {
        frame_shape: FrameShape::new(side, side),
        frames,
        amplitudes: vec![110.0, 40.0, 25.0],
        spike_fraction: 0.05,
        spike_scale: 10.0,
        seed: 0,
    }
    .generate()
    .expect("valid scene parameters")
    .data
}

/// Deterministic unit vector of length `m`, not aligned with any axis.
pub fn unit_vector(m: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..m).map(|i| ((i * 37 + 11) % 101) as f64 - 50.0).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}
