use serde::{Deserialize, Serialize};

use super::{rpca_alm, Decomposition, Lambda, SolverConfig};
use crate::error::{Error, Result};
use crate::numerics::DataMatrix;

/// Weights in sweep order: the nuclear-norm weight strictly decreases, so
/// the `l1` weight strictly increases and the rank of the solution tends to
/// grow along the path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSchedule {
    values: Vec<Lambda>,
}

impl LambdaSchedule {
    pub fn new(values: Vec<Lambda>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("lambda schedule is empty".into()));
        }
        if values
            .windows(2)
            .any(|w| w[0].nuclear_weight() <= w[1].nuclear_weight())
        {
            return Err(Error::InvalidInput(
                "lambda schedule must be strictly decreasing in the nuclear-norm weight".into(),
            ));
        }
        Ok(Self { values })
    }

    /// Any set of `l1` weights; sorted into sweep order, duplicates dropped.
    pub fn from_sparse_weights(weights: &[f64]) -> Result<Self> {
        let mut values = weights
            .iter()
            .map(|&w| Lambda::sparse(w))
            .collect::<Result<Vec<_>>>()?;
        values.sort_by(|a, b| a.sparse_weight().total_cmp(&b.sparse_weight()));
        values.dedup();
        Self::new(values)
    }

    /// `count` geometrically spaced `l1` weights from `lo` to `hi` inclusive.
    pub fn geometric(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidInput("lambda count must be positive".into()));
        }
        if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(Error::InvalidInput(format!("invalid lambda range {lo}:{hi}")));
        }
        if count == 1 {
            return Self::from_sparse_weights(&[lo]);
        }
        let ratio = (hi / lo).ln() / (count - 1) as f64;
        let weights: Vec<f64> = (0..count)
            .map(|i| {
                if i == count - 1 {
                    hi
                } else {
                    lo * (ratio * i as f64).exp()
                }
            })
            .collect();
        Self::from_sparse_weights(&weights)
    }

    /// 30 weights spanning `[0.05, 4] / sqrt(max(m, n))`.
    pub fn default_for(rows: usize, cols: usize) -> Self {
        let base = Lambda::standard(rows, cols).sparse_weight();
        Self::geometric(0.05 * base, 4.0 * base, 30).expect("valid default schedule")
    }

    pub fn values(&self) -> &[Lambda] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Solve along the schedule, warm-starting each weight from the previous
/// solution. Any failure aborts the path.
pub fn rpca_path(
    x: &DataMatrix,
    schedule: &LambdaSchedule,
    config: &SolverConfig,
) -> Result<Vec<Decomposition>> {
    rpca_path_lenient(x, schedule, config)
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::PathStep {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Like [`rpca_path`] but records failures per weight and keeps going. After
/// a convergence failure the next weight starts from the last iterate.
pub fn rpca_path_lenient(
    x: &DataMatrix,
    schedule: &LambdaSchedule,
    config: &SolverConfig,
) -> Vec<Result<Decomposition>> {
    let mut out = Vec::with_capacity(schedule.len());
    let mut previous: Option<Decomposition> = None;
    for &lambda in schedule.values() {
        let result = rpca_alm(x, lambda, previous.as_ref(), config);
        match &result {
            Ok(d) => previous = Some(d.clone()),
            Err(Error::Convergence { last, .. }) => previous = Some((**last).clone()),
            Err(_) => {}
        }
        out.push(result);
    }
    out
}
