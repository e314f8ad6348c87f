//! Reduced SVD and the shrinkage operators used by the solver.

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};

/// Singular values at or below `DEFAULT_RANK_TOL * sigma_max` are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// `U * diag(sigma) * V^T` with exactly `k` retained triplets.
///
/// Columns of `u` and `v` are orthonormal, `sigma` is strictly positive and
/// non-increasing, and the largest-magnitude entry of every column of `u`
/// is positive so the factorization is reproducible run to run.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl ReducedSvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

/// Full thin SVD, sorted by decreasing singular value. Signs are not normalized.
fn thin_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
            .then(a.cmp(&b))
    });
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = u.select_columns(order.iter());
    let v = v_t.transpose().select_columns(order.iter());
    (u, sigma, v)
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Reduced SVD keeping singular values strictly above `rank_tol * sigma_max`.
pub fn reduced_svd(m: &DMatrix<f64>, rank_tol: f64) -> Result<ReducedSvd> {
    if !(rank_tol >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "rank tolerance must be non-negative, got {rank_tol}"
        )));
    }
    check_finite(m)?;
    if m.is_empty() {
        return Err(Error::EmptyRank);
    }
    let (mut u, sigma, mut v) = thin_svd(m);
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return Err(Error::EmptyRank);
    }
    let cutoff = rank_tol * smax;
    let k = sigma.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    let sigma = sigma[..k].to_vec();
    u = u.columns(0, k).into_owned();
    v = v.columns(0, k).into_owned();

    for j in 0..k {
        let mut best = 0;
        for i in 1..u.nrows() {
            if u[(i, j)].abs() > u[(best, j)].abs() {
                best = i;
            }
        }
        if u[(best, j)] < 0.0 {
            u.column_mut(j).neg_mut();
            v.column_mut(j).neg_mut();
        }
    }
    Ok(ReducedSvd { u, sigma, v })
}

/// `sign(x) * max(|x| - tau, 0)`.
#[inline]
pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Entrywise [`soft_threshold`].
pub fn soft_threshold_matrix(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    m.map(|x| soft_threshold(x, tau))
}

/// Proximal operator of `tau * ||.||_*`: shrinks every singular value by `tau`.
pub fn singular_value_threshold(m: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    Ok(svt_with_rank(m, tau)?.0)
}

/// Like [`singular_value_threshold`], also returning the number of singular
/// values that survived the shrinkage.
pub(crate) fn svt_with_rank(m: &DMatrix<f64>, tau: f64) -> Result<(DMatrix<f64>, usize)> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "threshold must be non-negative, got {tau}"
        )));
    }
    check_finite(m)?;
    if m.is_empty() {
        return Ok((m.clone(), 0));
    }
    let (u, sigma, v) = thin_svd(m);
    let kept = sigma.iter().take_while(|&&s| s > tau).count();
    let mut us = u.columns(0, kept).into_owned();
    for (mut col, s) in us.column_iter_mut().zip(sigma.iter()) {
        col.scale_mut(s - tau);
    }
    Ok((us * v.columns(0, kept).transpose(), kept))
}

/// Sum of singular values.
pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().sum()
}
