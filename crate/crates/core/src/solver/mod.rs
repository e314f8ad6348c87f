//! Robust PCA by inexact augmented Lagrangian iterations.
//!
//! The program is solved in the scaled form
//!
//! ```text
//! min ||A||_* + lambda_E ||E||_1   s.t.  X = A + E
//! ```
//!
//! which is equivalent to `min ||X - A||_1 + lambda ||A||_*` with
//! `lambda = 1 / lambda_E`. [`Lambda`] carries both views of the weight.

mod alm;
mod path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DataMatrix;

pub use alm::{rpca_alm, rpca_objective, AlmState};
pub use path::{rpca_path, rpca_path_lenient, LambdaSchedule};

/// Regularization weight of the robust PCA program.
///
/// Stored as the weight on the `l1` term (`lambda_E`); the weight on the
/// nuclear norm is its reciprocal.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Lambda {
    sparse: f64,
}

impl Lambda {
    /// From the weight on `||E||_1` in `min ||A||_* + w ||E||_1`.
    pub fn sparse(weight: f64) -> Result<Self> {
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lambda must be positive and finite, got {weight}"
            )));
        }
        Ok(Self { sparse: weight })
    }

    /// From the weight on `||A||_*` in `min ||X - A||_1 + w ||A||_*`.
    pub fn nuclear(weight: f64) -> Result<Self> {
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lambda must be positive and finite, got {weight}"
            )));
        }
        Self::sparse(1.0 / weight)
    }

    /// `1 / sqrt(max(m, n))`, the usual weight for exact recovery.
    pub fn standard(rows: usize, cols: usize) -> Self {
        Self {
            sparse: 1.0 / (rows.max(cols) as f64).sqrt(),
        }
    }

    pub fn sparse_weight(&self) -> f64 {
        self.sparse
    }

    pub fn nuclear_weight(&self) -> f64 {
        1.0 / self.sparse
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once `||X - A - E||_F <= tol * ||X||_F`.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial penalty. `None` selects `1.25 / sigma_max(X)`.
    pub mu0: Option<f64>,
    /// Penalty growth factor per iteration.
    pub rho: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 1000,
            mu0: None,
            rho: 1.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.rho > 1.0) {
            return Err(Error::InvalidInput(format!(
                "rho must exceed 1, got {}",
                self.rho
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if let Some(mu) = self.mu0 {
            if !(mu > 0.0) || !mu.is_finite() {
                return Err(Error::InvalidInput(format!("mu0 must be positive, got {mu}")));
            }
        }
        Ok(())
    }
}

/// A split `X = A + E` produced by the solver for one weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub a: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub lambda: Lambda,
    /// Iterations spent producing this decomposition.
    pub iterations: usize,
    /// Relative primal residual `||X - A - E||_F / ||X||_F` at exit.
    pub residual: f64,
}

impl Decomposition {
    /// Checks that `a + e` reproduces `x` within `tol` (relative, Frobenius).
    pub fn new(x: &DataMatrix, a: DMatrix<f64>, e: DMatrix<f64>, lambda: Lambda, tol: f64) -> Result<Self> {
        x.check_same_shape(&a, "low-rank part")?;
        x.check_same_shape(&e, "error part")?;
        let residual = relative_residual(x.values(), &a, &e);
        if residual > tol {
            return Err(Error::Consistency(format!(
                "A + E differs from X by relative residual {residual:e} (tolerance {tol:e})"
            )));
        }
        Ok(Self {
            a,
            e,
            lambda,
            iterations: 0,
            residual,
        })
    }

    /// Numerical rank of the low-rank part.
    pub fn rank(&self) -> usize {
        crate::numerics::reduced_svd(&self.a, crate::numerics::DEFAULT_RANK_TOL)
            .map(|s| s.rank())
            .unwrap_or(0)
    }
}

pub(crate) fn relative_residual(x: &DMatrix<f64>, a: &DMatrix<f64>, e: &DMatrix<f64>) -> f64 {
    let norm_x = x.norm();
    let r = (x - a - e).norm();
    if norm_x == 0.0 {
        r
    } else {
        r / norm_x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_views() {
        let l = Lambda::nuclear(4.0).unwrap();
        assert_eq!(l.sparse_weight(), 0.25);
        assert_eq!(l.nuclear_weight(), 4.0);
        assert!(Lambda::sparse(0.0).is_err());
        assert!(Lambda::nuclear(f64::INFINITY).is_err());
        assert_eq!(Lambda::standard(100, 400).sparse_weight(), 0.05);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = [
            SolverConfig {
                tol: 0.0,
                ..Default::default()
            },
            SolverConfig {
                rho: 1.0,
                ..Default::default()
            },
            SolverConfig {
                max_iter: 0,
                ..Default::default()
            },
            SolverConfig {
                mu0: Some(-1.0),
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn decomposition_checks_reconstruction() {
        let x = DataMatrix::from_row_major(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let a = x.values().clone();
        let e = DMatrix::zeros(2, 2);
        let l = Lambda::sparse(0.5).unwrap();
        assert!(Decomposition::new(&x, a.clone(), e.clone(), l, 1e-12).is_ok());
        let off = a.add_scalar(0.1);
        assert!(matches!(
            Decomposition::new(&x, off, e, l, 1e-6),
            Err(Error::Consistency(_))
        ));
    }
}
