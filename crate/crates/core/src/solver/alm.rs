use nalgebra::DMatrix;

use super::{relative_residual, Decomposition, Lambda, SolverConfig};
use crate::error::{Error, Result};
use crate::numerics::{nuclear_norm, soft_threshold, svt_with_rank, DataMatrix};

/// `||X - W||_1 + lambda_nuclear * ||W||_*`.
pub fn rpca_objective(x: &DataMatrix, w: &DMatrix<f64>, lambda_nuclear: f64) -> Result<f64> {
    x.check_same_shape(w, "candidate")?;
    if !(lambda_nuclear > 0.0) {
        return Err(Error::InvalidInput(format!(
            "lambda must be positive, got {lambda_nuclear}"
        )));
    }
    let fit: f64 = (x.values() - w).iter().map(|v| v.abs()).sum();
    Ok(fit + lambda_nuclear * nuclear_norm(w))
}

/// Iterate of the inexact augmented Lagrangian method.
#[derive(Clone, Debug)]
pub struct AlmState {
    /// Lagrange multiplier for `X = A + E`.
    pub y: DMatrix<f64>,
    pub mu: f64,
    pub a: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub iter: usize,
    /// Number of singular values kept by the last shrinkage step.
    rank: usize,
}

impl AlmState {
    fn new(x: &DMatrix<f64>, lambda: Lambda, config: &SolverConfig, init: Option<&Decomposition>) -> Self {
        let spectral = x.singular_values().max();
        let mu = config.mu0.unwrap_or(1.25 / spectral);
        let inf_norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = spectral.max(inf_norm / lambda.sparse_weight());
        let y = x / scale;
        let (a, e) = match init {
            Some(d) => (d.a.clone(), d.e.clone()),
            None => (
                DMatrix::zeros(x.nrows(), x.ncols()),
                DMatrix::zeros(x.nrows(), x.ncols()),
            ),
        };
        Self {
            y,
            mu,
            a,
            e,
            iter: 0,
            rank: 0,
        }
    }

    /// One sweep: shrink singular values, shrink entries, ascend the dual.
    /// Returns the relative primal residual after the update.
    fn step(&mut self, x: &DMatrix<f64>, lambda: Lambda, rho: f64, norm_x: f64) -> Result<f64> {
        let inv_mu = 1.0 / self.mu;
        let target = x - &self.e + &self.y * inv_mu;
        let (a, rank) = svt_with_rank(&target, inv_mu)?;
        self.a = a;
        self.rank = rank;

        let tau = lambda.sparse_weight() * inv_mu;
        self.e = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            soft_threshold(x[(i, j)] - self.a[(i, j)] + self.y[(i, j)] * inv_mu, tau)
        });

        let z = x - &self.a - &self.e;
        self.y += &z * self.mu;
        self.mu *= rho;
        self.iter += 1;
        Ok(z.norm() / norm_x)
    }

    fn into_decomposition(self, lambda: Lambda, residual: f64) -> Decomposition {
        Decomposition {
            a: self.a,
            e: self.e,
            lambda,
            iterations: self.iter,
            residual,
        }
    }
}

/// Solve the robust PCA program for one weight.
///
/// `init`, when given, is the starting iterate (warm restart). Identical
/// inputs always produce bit-identical outputs.
pub fn rpca_alm(
    x: &DataMatrix,
    lambda: Lambda,
    init: Option<&Decomposition>,
    config: &SolverConfig,
) -> Result<Decomposition> {
    config.validate()?;
    let xv = x.values();
    if let Some(d) = init {
        x.check_same_shape(&d.a, "warm-start low-rank part")?;
        x.check_same_shape(&d.e, "warm-start error part")?;
    }
    let norm_x = xv.norm();
    if norm_x == 0.0 {
        let zeros = DMatrix::zeros(xv.nrows(), xv.ncols());
        return Ok(Decomposition {
            a: zeros.clone(),
            e: zeros,
            lambda,
            iterations: 0,
            residual: 0.0,
        });
    }

    let mut state = AlmState::new(xv, lambda, config, init);
    let mut residual = relative_residual(xv, &state.a, &state.e);
    while state.iter < config.max_iter {
        residual = state.step(xv, lambda, config.rho, norm_x)?;
        if residual <= config.tol {
            log::debug!(
                "alm converged: lambda_E={:.4e} iter={} rank={} residual={:.3e}",
                lambda.sparse_weight(),
                state.iter,
                state.rank,
                residual
            );
            return Ok(state.into_decomposition(lambda, residual));
        }
    }
    let iterations = state.iter;
    Err(Error::Convergence {
        iterations,
        residual,
        last: Box::new(state.into_decomposition(lambda, residual)),
    })
}
