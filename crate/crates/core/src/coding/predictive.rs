//! Causal prediction transforms and their exact inverses.
//!
//! The coders run these on integer quantization levels, where the inverse is
//! exact. The `f64` entry points are exact whenever the inputs are
//! integer-valued (or otherwise free of rounding under `+`/`-`).

use std::ops::{Add, Sub};

use crate::error::{Error, Result};
use crate::numerics::FrameShape;

fn check_shape(len: usize, shape: FrameShape) -> Result<()> {
    if shape.pixels() != len {
        return Err(Error::InvalidInput(format!(
            "image of {len} pixels does not match shape {}x{}",
            shape.height, shape.width
        )));
    }
    Ok(())
}

/// `b[j][l] - (b[j][l-1] + b[j-1][l] - b[j-1][l-1])` in raster order, with
/// out-of-range pixels taken as zero.
pub(crate) fn bilinear_residuals_generic<T>(image: &[T], shape: FrameShape) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T>,
{
    let w = shape.width;
    let at = |j: usize, l: usize| image[j * w + l];
    let mut out = Vec::with_capacity(image.len());
    for j in 0..shape.height {
        for l in 0..w {
            let left = if l > 0 { at(j, l - 1) } else { T::default() };
            let up = if j > 0 { at(j - 1, l) } else { T::default() };
            let diag = if j > 0 && l > 0 {
                at(j - 1, l - 1)
            } else {
                T::default()
            };
            out.push(at(j, l) - (left + up - diag));
        }
    }
    out
}

fn bilinear_reconstruct_generic<T>(residuals: &[T], shape: FrameShape) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T>,
{
    let w = shape.width;
    let mut out: Vec<T> = Vec::with_capacity(residuals.len());
    for j in 0..shape.height {
        for l in 0..w {
            let left = if l > 0 { out[j * w + l - 1] } else { T::default() };
            let up = if j > 0 { out[(j - 1) * w + l] } else { T::default() };
            let diag = if j > 0 && l > 0 {
                out[(j - 1) * w + l - 1]
            } else {
                T::default()
            };
            out.push(residuals[j * w + l] + (left + up - diag));
        }
    }
    out
}

/// Prediction residuals of a raster-ordered image under the causal bilinear
/// predictor.
pub fn bilinear_residuals(image: &[f64], shape: FrameShape) -> Result<Vec<f64>> {
    check_shape(image.len(), shape)?;
    Ok(bilinear_residuals_generic(image, shape))
}

/// Inverse of [`bilinear_residuals`].
pub fn bilinear_reconstruct(residuals: &[f64], shape: FrameShape) -> Result<Vec<f64>> {
    check_shape(residuals.len(), shape)?;
    Ok(bilinear_reconstruct_generic(residuals, shape))
}

pub(crate) fn first_diff_generic<T>(v: &[T]) -> Vec<T>
where
    T: Copy + Sub<Output = T>,
{
    let mut out = Vec::with_capacity(v.len());
    if let Some(&first) = v.first() {
        out.push(first);
        out.extend(v.windows(2).map(|w| w[1] - w[0]));
    }
    out
}

/// `(v1, v2 - v1, v3 - v2, ...)`.
pub fn first_diff_residuals(v: &[f64]) -> Vec<f64> {
    first_diff_generic(v)
}

/// Prefix sums; inverse of [`first_diff_residuals`].
pub fn first_diff_reconstruct(residuals: &[f64]) -> Vec<f64> {
    residuals
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r;
            Some(*acc)
        })
        .collect()
}
