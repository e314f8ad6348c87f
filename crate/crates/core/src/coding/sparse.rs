use nalgebra::DMatrix;
use rayon::prelude::*;

use super::enumerative::log2_binomial;
use super::laplace::{laplace_levels_bits, level_stats};
use super::CodeLength;
use crate::error::{Error, Result};

/// Bits for one row given its quantization levels.
fn row_bits(levels: impl Iterator<Item = i64>, n: usize) -> f64 {
    let (_, zeros, abs_sum) = level_stats(levels);
    let k = n - zeros;
    let support = ((n + 1) as f64).log2() + log2_binomial(n, k);
    // Only the nonzero values are coded; zeros were already described by the support.
    let (param, data) = laplace_levels_bits(k, 0, abs_sum);
    support + param + data
}

/// Codelength of the error matrix quantized to multiples of `delta_e`.
///
/// Rows are coded independently: the support with the enumerative code,
/// then the nonzero values with a two-part Laplacian code whose scale is
/// fitted per row.
pub fn sparse_error_codelength(e: &DMatrix<f64>, delta_e: f64) -> Result<CodeLength> {
    if !(delta_e > 0.0) || !delta_e.is_finite() {
        return Err(Error::InvalidInput(format!(
            "delta_e must be positive, got {delta_e}"
        )));
    }
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("error matrix has non-finite entries".into()));
    }
    let n = e.ncols();
    let per_row: Vec<f64> = (0..e.nrows())
        .into_par_iter()
        .map(|i| row_bits(e.row(i).iter().map(|&x| (x / delta_e).round() as i64), n))
        .collect();
    Ok(CodeLength::from_bits(per_row.iter().sum()))
}
