use nalgebra::DMatrix;
use rayon::prelude::*;

use super::laplace::{laplace_levels_bits, level_stats};
use super::predictive::{bilinear_residuals_generic, first_diff_generic};
use super::sphere::spherical_matrix_bits;
use super::{CodeLength, CoderMode, QuantizationGrid};
use crate::error::{Error, Result};
use crate::numerics::FrameShape;

fn levels(values: impl Iterator<Item = f64>, delta: f64) -> Vec<i64> {
    values.map(|v| (v / delta).round() as i64).collect()
}

fn two_part_bits(residuals: &[i64]) -> f64 {
    let (n, zeros, abs_sum) = level_stats(residuals.iter().copied());
    let (param, data) = laplace_levels_bits(n, zeros, abs_sum);
    param + data
}

/// Sum per-column results in a fixed order so the total does not depend on
/// thread scheduling.
fn sum_columns<F>(k: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let parts: Vec<f64> = (0..k).into_par_iter().map(f).collect();
    parts.iter().sum()
}

/// Codelength of the left factor.
///
/// `u` holds the orthonormal columns; quantization to `grid.delta_u` happens
/// here. Predictive mode needs `frame_shape` so each column can be viewed as
/// an image.
pub fn matrix_u_codelength(
    u: &DMatrix<f64>,
    frame_shape: Option<FrameShape>,
    grid: &QuantizationGrid,
    mode: CoderMode,
) -> Result<CodeLength> {
    let (m, k) = u.shape();
    if k == 0 {
        return Ok(CodeLength::ZERO);
    }
    let delta = grid.delta_u;
    let bits = match mode {
        CoderMode::Predictive => {
            let shape = frame_shape
                .ok_or_else(|| Error::InvalidInput("predictive U coding requires a frame shape".into()))?;
            if shape.pixels() != m {
                return Err(Error::InvalidInput(format!(
                    "frame shape {}x{} does not match {m} rows",
                    shape.height, shape.width
                )));
            }
            sum_columns(k, |j| {
                let q = levels(u.column(j).iter().copied(), delta);
                two_part_bits(&bilinear_residuals_generic(&q, shape))
            })
        }
        CoderMode::Spherical => {
            if k > m {
                return Err(Error::InvalidInput(format!(
                    "{k} orthonormal columns cannot live in R^{m}"
                )));
            }
            spherical_matrix_bits(u, delta)
        }
    };
    Ok(CodeLength::from_bits(bits))
}

/// Codelength of the right factor: first differences along time, coded with
/// a two-part Laplacian code per column.
pub fn matrix_v_codelength(v: &DMatrix<f64>, grid: &QuantizationGrid) -> Result<CodeLength> {
    let k = v.ncols();
    let delta = grid.delta_v;
    let bits = sum_columns(k, |j| {
        let q = levels(v.column(j).iter().copied(), delta);
        two_part_bits(&first_diff_generic(&q))
    });
    Ok(CodeLength::from_bits(bits))
}
