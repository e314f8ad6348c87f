use nalgebra::DMatrix;

use super::quantize::{quantize_factors, QuantizedDecomposition};
use crate::coding::{BitAllocation, CoderMode, QuantizationGrid};
use crate::error::{Error, Result};
use crate::numerics::{reduced_svd, DataMatrix, ReducedSvd};

/// Hard limit on accepted halvings of `delta_u` and `delta_v`.
pub const MAX_HALVINGS: usize = 40;

/// Best grid found for one candidate.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub grid: QuantizationGrid,
    pub allocation: BitAllocation,
    /// Number of halvings that were accepted.
    pub halvings: usize,
    pub model: QuantizedDecomposition,
}

/// Halve `delta_u` and `delta_v` together until the total codelength stops
/// strictly decreasing.
pub fn refine_quantization(
    x: &DataMatrix,
    a: &DMatrix<f64>,
    start: &QuantizationGrid,
    mode: CoderMode,
    rank_tol: f64,
) -> Result<Refinement> {
    x.check_same_shape(a, "low-rank part")?;
    let factors = match reduced_svd(a, rank_tol) {
        Ok(f) => Some(f),
        Err(Error::EmptyRank) => None,
        Err(e) => return Err(e),
    };
    refine_factors(x, factors.as_ref(), start, mode)
}

pub(crate) fn refine_factors(
    x: &DataMatrix,
    factors: Option<&ReducedSvd>,
    start: &QuantizationGrid,
    mode: CoderMode,
) -> Result<Refinement> {
    let model = quantize_factors(x, factors, start)?;
    let allocation = model.codelength(x, mode)?;
    let mut best = Refinement {
        grid: *start,
        allocation,
        halvings: 0,
        model,
    };
    while best.halvings < MAX_HALVINGS {
        let grid = best.grid.halved();
        let model = quantize_factors(x, factors, &grid)?;
        let allocation = model.codelength(x, mode)?;
        if allocation.total.bits() < best.allocation.total.bits() {
            best = Refinement {
                grid,
                allocation,
                halvings: best.halvings + 1,
                model,
            };
        } else {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{FrameShape, DEFAULT_RANK_TOL};
    use std::f64::consts::PI;

    fn smooth_rank_one() -> DataMatrix {
        let shape = FrameShape::new(12, 12);
        let n = 60;
        let x = DMatrix::from_fn(shape.pixels(), n, |p, t| {
            let (r, c) = ((p / 12) as f64, (p % 12) as f64);
            let img = 90.0 + 40.0 * (PI * r / 24.0).cos() * (PI * c / 24.0).sin();
            (img * (1.0 + 0.3 * (2.0 * PI * t as f64 / n as f64).sin())).round()
        });
        DataMatrix::new(x).unwrap().with_frame_shape(shape).unwrap()
    }

    #[test]
    fn rank_zero_stops_immediately() {
        let x = smooth_rank_one();
        let start = QuantizationGrid::starting(x.rows(), x.cols(), 1.0).unwrap();
        let zero = DMatrix::zeros(x.rows(), x.cols());
        let r = refine_quantization(&x, &zero, &start, CoderMode::Predictive, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.halvings, 0);
        assert_eq!(r.grid, start);
    }

    #[test]
    fn smooth_candidate_accepts_halvings() {
        let x = smooth_rank_one();
        let start = QuantizationGrid::starting(x.rows(), x.cols(), 1.0).unwrap();
        let svd = reduced_svd(x.values(), DEFAULT_RANK_TOL).unwrap();
        let a = svd.u.columns(0, 1) * svd.sigma[0] * svd.v.columns(0, 1).transpose();
        let r = refine_quantization(&x, &a, &start, CoderMode::Predictive, DEFAULT_RANK_TOL).unwrap();
        assert!(r.halvings >= 1);
        let at_start = quantize_factors(&x, Some(&reduced_svd(&a, DEFAULT_RANK_TOL).unwrap()), &start)
            .unwrap()
            .codelength(&x, CoderMode::Predictive)
            .unwrap();
        assert!(r.allocation.total <= at_start.total);
        assert_eq!(&r.model.reconstruct(), x.values());
        assert_eq!(r.grid.delta_u, start.delta_u / f64::powi(2.0, r.halvings as i32));
    }
}
