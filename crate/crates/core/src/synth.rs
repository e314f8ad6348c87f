//! Seeded generators for test and benchmark data.
//!
//! Every generator takes an explicit seed and uses ChaCha8, so the same
//! arguments give the same matrix on every platform.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{DataMatrix, FrameShape};

/// 2D cosine basis image with frequencies `(p, q)`, unit norm.
pub fn cosine_image(shape: FrameShape, p: usize, q: usize) -> Vec<f64> {
    let (h, w) = (shape.height as f64, shape.width as f64);
    let mut img: Vec<f64> = (0..shape.pixels())
        .map(|i| {
            let (r, c) = ((i / shape.width) as f64, (i % shape.width) as f64);
            (PI * p as f64 * (r + 0.5) / h).cos() * (PI * q as f64 * (c + 0.5) / w).cos()
        })
        .collect();
    let norm = img.iter().map(|v| v * v).sum::<f64>().sqrt();
    img.iter_mut().for_each(|v| *v /= norm);
    img
}

/// A video-like stack: a few smooth eigen-images with smooth time courses,
/// salt-and-pepper style spikes, clamped and rounded to 8-bit pixels.
#[derive(Clone, Debug)]
pub struct SmoothScene {
    pub frame_shape: FrameShape,
    pub frames: usize,
    /// Peak pixel amplitude of each component; the first one is the static
    /// background level.
    pub amplitudes: Vec<f64>,
    /// Fraction of entries replaced by spikes.
    pub spike_fraction: f64,
    /// Spike magnitude as a multiple of the RMS of the clean signal.
    pub spike_scale: f64,
    pub seed: u64,
}

/// What [`SmoothScene::generate`] produces.
#[derive(Clone, Debug)]
pub struct SceneSample {
    pub data: DataMatrix,
    /// Signal before spikes, clamping and rounding.
    pub clean: DMatrix<f64>,
    /// Column-major indices of spiked entries, sorted.
    pub spikes: Vec<usize>,
}

impl SmoothScene {
    /// Frequencies of the eigen-images in order of use.
    const MODES: [(usize, usize); 8] = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1), (1, 2)];

    pub fn rank(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn generate(&self) -> Result<SceneSample> {
        let k = self.rank();
        if k == 0 || k > Self::MODES.len() {
            return Err(Error::InvalidInput(format!(
                "scene supports 1 to {} components, got {k}",
                Self::MODES.len()
            )));
        }
        if !(0.0..1.0).contains(&self.spike_fraction) {
            return Err(Error::InvalidInput("spike fraction must lie in [0, 1)".into()));
        }
        let m = self.frame_shape.pixels();
        let n = self.frames;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);

        let mut clean = DMatrix::<f64>::zeros(m, n);
        for (i, (&amp, &(p, q))) in self.amplitudes.iter().zip(Self::MODES.iter()).enumerate() {
            let img = cosine_image(self.frame_shape, p, q);
            let peak = img.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let phase = rng.random_range(0.0..2.0 * PI);
            let cycles = 0.5 + i as f64;
            for t in 0..n {
                let course = if i == 0 {
                    1.0
                } else {
                    (2.0 * PI * cycles * t as f64 / n as f64 + phase).sin()
                };
                for (r, &g) in img.iter().enumerate() {
                    clean[(r, t)] += amp * course * g / peak;
                }
            }
        }

        let rms: f64 = (clean.norm_squared() / (m * n) as f64).sqrt();
        let count = (self.spike_fraction * (m * n) as f64).round() as usize;
        let mut spikes = sample(&mut rng, m * n, count).into_vec();
        spikes.sort_unstable();
        let mut noisy = clean.clone();
        for &idx in &spikes {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            noisy[idx] += sign * self.spike_scale * rms;
        }
        let pixels = noisy.map(|v| v.round().clamp(0.0, 255.0));
        let data = DataMatrix::new(pixels)?.with_frame_shape(self.frame_shape)?;
        Ok(SceneSample { data, clean, spikes })
    }
}

/// IID integers drawn uniformly from `lo..=hi`.
pub fn uniform_integer_noise(rows: usize, cols: usize, lo: i64, hi: i64, seed: u64) -> Result<DataMatrix> {
    if lo > hi {
        return Err(Error::InvalidInput(format!("empty range {lo}..={hi}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataMatrix::new(DMatrix::from_fn(rows, cols, |_, _| {
        rng.random_range(lo..=hi) as f64
    }))
}

/// Gaussian rank-`rank` matrix plus spikes on a `spike_fraction` of entries,
/// with spike values uniform on `[-spike_scale, spike_scale]`.
pub fn gaussian_low_rank_plus_spikes(
    rows: usize,
    cols: usize,
    rank: usize,
    spike_fraction: f64,
    spike_scale: f64,
    seed: u64,
) -> Result<DataMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = DMatrix::from_fn(rows, rank, |_, _| rng.sample::<f64, _>(StandardNormal));
    let v = DMatrix::from_fn(cols, rank, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut x = u * v.transpose();
    let count = (spike_fraction * (rows * cols) as f64).round() as usize;
    for idx in sample(&mut rng, rows * cols, count) {
        x[idx] += rng.random_range(-spike_scale..=spike_scale);
    }
    DataMatrix::new(x)
}
