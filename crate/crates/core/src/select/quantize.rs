use nalgebra::DMatrix;

use crate::coding::{total_codelength, BitAllocation, CoderMode, QuantizationGrid, QuantizedSvd};
use crate::error::{Error, Result};
use crate::numerics::{reduced_svd, DataMatrix, ReducedSvd};

/// A candidate model on its quantization lattices, lossless by construction.
///
/// The decoder computes `U_q diag(sigma_q) V_q^T`, rounds it onto the
/// `delta_e` lattice and adds `e`. `e` absorbs every quantization error, so
/// the sum is `X` on that lattice (bit-exact for integer data at
/// `delta_e = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedDecomposition {
    pub low_rank: Option<QuantizedSvd>,
    /// Multiples of `grid.delta_e`.
    pub e: DMatrix<f64>,
    pub grid: QuantizationGrid,
}

impl QuantizedDecomposition {
    pub fn rank(&self) -> usize {
        self.low_rank.as_ref().map_or(0, |q| q.rank())
    }

    /// Low-rank part as the decoder sees it: snapped to the `delta_e` lattice.
    pub fn low_rank_on_lattice(&self) -> DMatrix<f64> {
        let d = self.grid.delta_e;
        match &self.low_rank {
            Some(q) => q.reconstruct().map(|v| (v / d).round() * d),
            None => DMatrix::zeros(self.e.nrows(), self.e.ncols()),
        }
    }

    /// What the decoder outputs.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = self.grid.delta_e;
        let levels = self.low_rank_on_lattice().map(|v| (v / d).round()) + self.e.map(|v| (v / d).round());
        levels * d
    }

    pub fn codelength(&self, x: &DataMatrix, mode: CoderMode) -> Result<BitAllocation> {
        total_codelength(x, self.low_rank.as_ref(), &self.e, &self.grid, mode)
    }
}

/// Quantize already-factored low-rank part `factors` (or the zero matrix).
pub fn quantize_factors(
    x: &DataMatrix,
    factors: Option<&ReducedSvd>,
    grid: &QuantizationGrid,
) -> Result<QuantizedDecomposition> {
    grid.validate()?;
    let low_rank = factors.and_then(|f| QuantizedSvd::quantize(f, grid));
    if let Some(q) = &low_rank {
        if q.u.nrows() != x.rows() || q.v.nrows() != x.cols() {
            return Err(Error::InvalidInput(format!(
                "factors are {}x{}, data is {}x{}",
                q.u.nrows(),
                q.v.nrows(),
                x.rows(),
                x.cols()
            )));
        }
    }
    let d = grid.delta_e;
    let x_levels = x.values().map(|v| (v / d).round());
    let a_levels = match &low_rank {
        Some(q) => q.reconstruct().map(|v| (v / d).round()),
        None => DMatrix::zeros(x.rows(), x.cols()),
    };
    let e = (x_levels - a_levels) * d;
    Ok(QuantizedDecomposition {
        low_rank,
        e,
        grid: *grid,
    })
}

/// Factor `a`, quantize its factors, and recompute the error part from `x`.
/// A numerically zero `a` yields the rank-0 candidate with `e = X` quantized.
pub fn quantize_decomposition(
    x: &DataMatrix,
    a: &DMatrix<f64>,
    grid: &QuantizationGrid,
    rank_tol: f64,
) -> Result<QuantizedDecomposition> {
    x.check_same_shape(a, "low-rank part")?;
    let factors = match reduced_svd(a, rank_tol) {
        Ok(f) => Some(f),
        Err(Error::EmptyRank) => None,
        Err(e) => return Err(e),
    };
    quantize_factors(x, factors.as_ref(), grid)
}
