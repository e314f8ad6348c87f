use nalgebra::DMatrix;

use super::{
    matrix_u_codelength, matrix_v_codelength, sigma_codelength, sparse_error_codelength, BitAllocation,
    CodeLength, CoderMode, QuantizationGrid, SIGMA_PRECISION,
};
use crate::error::{Error, Result};
use crate::numerics::{DataMatrix, ReducedSvd};

/// Low-rank factors on their quantization lattices.
///
/// `factors` keeps the orthonormal factors the quantized ones came from; the
/// spherical coder needs exact orthonormality.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedSvd {
    pub factors: ReducedSvd,
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

fn on_lattice(m: &DMatrix<f64>, delta: f64) -> DMatrix<f64> {
    m.map(|x| (x / delta).round() * delta)
}

impl QuantizedSvd {
    /// Quantize `U`, `sigma` and `V`. Triplets whose singular value rounds
    /// to zero are dropped; `None` when nothing survives.
    pub fn quantize(factors: &ReducedSvd, grid: &QuantizationGrid) -> Option<Self> {
        let keep: Vec<usize> = factors
            .sigma
            .iter()
            .enumerate()
            .filter(|(_, &s)| (s / SIGMA_PRECISION).round() >= 1.0)
            .map(|(i, _)| i)
            .collect();
        if keep.is_empty() {
            return None;
        }
        let factors = ReducedSvd {
            u: factors.u.select_columns(keep.iter()),
            sigma: keep.iter().map(|&i| factors.sigma[i]).collect(),
            v: factors.v.select_columns(keep.iter()),
        };
        let sigma = factors
            .sigma
            .iter()
            .map(|s| (s / SIGMA_PRECISION).round() * SIGMA_PRECISION)
            .collect();
        Some(Self {
            u: on_lattice(&factors.u, grid.delta_u),
            v: on_lattice(&factors.v, grid.delta_v),
            sigma,
            factors,
        })
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `U_q * diag(sigma_q) * V_q^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

/// Integer levels of `m` on the lattice `delta * Z`.
pub(crate) fn lattice_levels(m: &DMatrix<f64>, delta: f64) -> DMatrix<f64> {
    m.map(|x| (x / delta).round())
}

/// Total description length of `x` as a quantized low-rank part plus `e`.
///
/// The decoder rebuilds the low-rank part from the quantized factors, snaps
/// it to the `delta_e` lattice, and adds `e`; the result must equal `x` on
/// that lattice. `a = None` is the rank-0 model.
pub fn total_codelength(
    x: &DataMatrix,
    a: Option<&QuantizedSvd>,
    e: &DMatrix<f64>,
    grid: &QuantizationGrid,
    u_mode: CoderMode,
) -> Result<BitAllocation> {
    grid.validate()?;
    x.check_same_shape(e, "error part")?;
    let x_levels = lattice_levels(x.values(), grid.delta_e);
    let e_levels = lattice_levels(e, grid.delta_e);
    let expected = match a {
        Some(q) => {
            let recon = q.reconstruct();
            x.check_same_shape(&recon, "low-rank part")?;
            lattice_levels(&recon, grid.delta_e) + &e_levels
        }
        None => e_levels,
    };
    if expected != x_levels {
        let mismatches = expected
            .iter()
            .zip(x_levels.iter())
            .filter(|(a, b)| a != b)
            .count();
        return Err(Error::Consistency(format!(
            "quantized low-rank part plus error differs from X in {mismatches} entries"
        )));
    }

    let l_e = sparse_error_codelength(e, grid.delta_e)?;
    let Some(q) = a else {
        return Ok(BitAllocation::new(
            CodeLength::ZERO,
            CodeLength::ZERO,
            CodeLength::ZERO,
            l_e,
        ));
    };
    let l_sigma = sigma_codelength(&q.sigma)?;
    let l_u = matrix_u_codelength(&q.factors.u, x.frame_shape(), grid, u_mode)?;
    let l_v = matrix_v_codelength(&q.factors.v, grid)?;
    Ok(BitAllocation::new(l_u, l_sigma, l_v, l_e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{reduced_svd, FrameShape, DEFAULT_RANK_TOL};

    #[test]
    fn zero_data_rank_zero() {
        let (m, n) = (6, 9);
        let x = DataMatrix::new(DMatrix::zeros(m, n)).unwrap();
        let grid = QuantizationGrid::starting(m, n, 1.0).unwrap();
        let b = total_codelength(&x, None, &DMatrix::zeros(m, n), &grid, CoderMode::Spherical).unwrap();
        assert!((b.total.bits() - m as f64 * ((n + 1) as f64).log2()).abs() < 1e-10);
        assert_eq!(b.l_u.bits() + b.l_v.bits() + b.l_sigma.bits(), 0.0);
    }

    #[test]
    fn rejects_lossy_pair() {
        let x = DataMatrix::from_row_major(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let grid = QuantizationGrid::starting(2, 2, 1.0).unwrap();
        let e = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 5.0]);
        assert!(matches!(
            total_codelength(&x, None, &e, &grid, CoderMode::Spherical),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn rank_one_beats_raw_error() {
        let shape = FrameShape::new(10, 10);
        let n = 40;
        let x = DMatrix::from_fn(100, n, |p, t| {
            let (r, c) = ((p / 10) as f64, (p % 10) as f64);
            let img = 100.0 + 20.0 * (r / 10.0) + 10.0 * (c / 10.0);
            (img * (1.0 + 0.2 * (t as f64 / n as f64))).round()
        });
        let x = DataMatrix::new(x).unwrap().with_frame_shape(shape).unwrap();
        let mut grid = QuantizationGrid::starting(100, n, 1.0).unwrap();
        for _ in 0..10 {
            grid = grid.halved();
        }
        let svd = reduced_svd(x.values(), DEFAULT_RANK_TOL).unwrap();
        let top = ReducedSvd {
            u: svd.u.columns(0, 1).into_owned(),
            sigma: vec![svd.sigma[0]],
            v: svd.v.columns(0, 1).into_owned(),
        };
        let q = QuantizedSvd::quantize(&top, &grid).unwrap();
        let e = x.values() - lattice_levels(&q.reconstruct(), 1.0);
        let rank1 = total_codelength(&x, Some(&q), &e, &grid, CoderMode::Predictive).unwrap();
        let rank0 = total_codelength(&x, None, x.values(), &grid, CoderMode::Predictive).unwrap();
        assert!(rank1.total < rank0.total, "{rank1:?} vs {rank0:?}");
        let sum = rank1.l_u.bits() + rank1.l_sigma.bits() + rank1.l_v.bits() + rank1.l_e.bits();
        assert!((rank1.total.bits() - sum).abs() < 1e-9);
    }

    #[test]
    fn quantize_drops_vanishing_triplets() {
        let svd = ReducedSvd {
            u: DMatrix::identity(3, 2),
            sigma: vec![2.0, 1e-18],
            v: DMatrix::identity(3, 2),
        };
        let grid = QuantizationGrid::starting(3, 3, 1.0).unwrap();
        let q = QuantizedSvd::quantize(&svd, &grid).unwrap();
        assert_eq!(q.rank(), 1);
        let tiny = ReducedSvd {
            sigma: vec![1e-17],
            u: DMatrix::identity(3, 1),
            v: DMatrix::identity(3, 1),
        };
        assert!(QuantizedSvd::quantize(&tiny, &grid).is_none());
    }
}
