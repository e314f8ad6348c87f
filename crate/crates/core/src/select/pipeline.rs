use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::refine::{refine_factors, refine_quantization, Refinement};
use crate::coding::{BitAllocation, CoderMode, QuantizationGrid};
use crate::error::{Error, Result};
use crate::numerics::{reduced_svd, DataMatrix, FrameShape, DEFAULT_RANK_TOL};
use crate::solver::{rpca_path_lenient, Lambda, LambdaSchedule, SolverConfig};

use super::quantize::QuantizedDecomposition;

/// Step for the error lattice when the caller does not fix one: 1 for
/// integer-valued data (raw pixels), otherwise a millionth of the range.
pub fn default_delta_e(x: &DataMatrix) -> f64 {
    if x.is_integer_valued() {
        return 1.0;
    }
    let (lo, hi) = x
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    if range > 0.0 {
        1e-6 * range
    } else {
        1e-6 * hi.abs()
    }
}

/// Predictive coding of `U` when columns are images, spherical otherwise.
pub fn default_coder_mode(x: &DataMatrix) -> CoderMode {
    if x.frame_shape().is_some() {
        CoderMode::Predictive
    } else {
        CoderMode::Spherical
    }
}

#[derive(Clone, Debug, Default)]
pub struct SelectionOptions {
    /// `None` picks [`default_coder_mode`].
    pub u_mode: Option<CoderMode>,
    /// `None` picks [`default_delta_e`].
    pub delta_e: Option<f64>,
    /// `None` uses [`DEFAULT_RANK_TOL`].
    pub rank_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    /// Solution of the robust PCA program at one schedule weight.
    Path,
    /// `A = 0`, everything coded as error.
    ZeroRank,
    /// `A = X` at its full numerical rank.
    FullRank,
}

#[derive(Clone, Debug)]
pub enum CandidateOutcome {
    Scored {
        allocation: BitAllocation,
        grid: QuantizationGrid,
        halvings: usize,
        model: Box<QuantizedDecomposition>,
    },
    Failed {
        reason: String,
    },
}

#[derive(Clone, Debug)]
pub struct ModelCandidate {
    pub kind: CandidateKind,
    pub lambda: Option<Lambda>,
    /// Rank of the quantized low-rank part (0 for failed candidates).
    pub rank: usize,
    pub solver_iterations: usize,
    pub solver_residual: f64,
    pub outcome: CandidateOutcome,
}

impl ModelCandidate {
    pub fn allocation(&self) -> Option<&BitAllocation> {
        match &self.outcome {
            CandidateOutcome::Scored { allocation, .. } => Some(allocation),
            CandidateOutcome::Failed { .. } => None,
        }
    }

    pub fn model(&self) -> Option<&QuantizedDecomposition> {
        match &self.outcome {
            CandidateOutcome::Scored { model, .. } => Some(model),
            CandidateOutcome::Failed { .. } => None,
        }
    }

    fn scored(
        kind: CandidateKind,
        lambda: Option<Lambda>,
        iterations: usize,
        residual: f64,
        r: Refinement,
    ) -> Self {
        Self {
            kind,
            lambda,
            rank: r.model.rank(),
            solver_iterations: iterations,
            solver_residual: residual,
            outcome: CandidateOutcome::Scored {
                allocation: r.allocation,
                grid: r.grid,
                halvings: r.halvings,
                model: Box::new(r.model),
            },
        }
    }

    fn failed(kind: CandidateKind, lambda: Option<Lambda>, reason: String) -> Self {
        Self {
            kind,
            lambda,
            rank: 0,
            solver_iterations: 0,
            solver_residual: f64::NAN,
            outcome: CandidateOutcome::Failed { reason },
        }
    }
}

/// Every candidate with its codelengths and the minimum-description-length choice.
#[derive(Clone, Debug)]
pub struct SelectionReport {
    /// Path candidates in sweep order, then the rank-0 and full-rank references.
    pub candidates: Vec<ModelCandidate>,
    pub best_index: usize,
    pub schedule: LambdaSchedule,
    pub solver: SolverConfig,
    pub u_mode: CoderMode,
    pub start_grid: QuantizationGrid,
    pub rows: usize,
    pub cols: usize,
    pub frame_shape: Option<FrameShape>,
}

impl SelectionReport {
    pub fn best(&self) -> &ModelCandidate {
        &self.candidates[self.best_index]
    }
}

/// Index of the smallest total; ties go to the smaller rank, then the
/// earlier candidate.
pub(crate) fn argmin_candidate(candidates: &[ModelCandidate]) -> Option<usize> {
    candidates
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.allocation().map(|a| (i, a.total.bits(), c.rank)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)).then(a.0.cmp(&b.0)))
        .map(|(i, _, _)| i)
}

/// Sweep the schedule, score every solution plus the two reference
/// candidates, and pick the shortest description.
pub fn select_model(
    x: &DataMatrix,
    schedule: &LambdaSchedule,
    solver: &SolverConfig,
    options: &SelectionOptions,
) -> Result<SelectionReport> {
    solver.validate()?;
    let u_mode = options.u_mode.unwrap_or_else(|| default_coder_mode(x));
    if u_mode == CoderMode::Predictive && x.frame_shape().is_none() {
        return Err(Error::InvalidInput(
            "predictive U coding requires frame-shaped data".into(),
        ));
    }
    let delta_e = options.delta_e.unwrap_or_else(|| default_delta_e(x));
    let rank_tol = options.rank_tol.unwrap_or(DEFAULT_RANK_TOL);
    let start_grid = QuantizationGrid::starting(x.rows(), x.cols(), delta_e)?;

    let solutions = rpca_path_lenient(x, schedule, solver);

    let mut candidates: Vec<ModelCandidate> = solutions
        .into_par_iter()
        .map(|solution| match solution {
            Ok(d) => match refine_quantization(x, &d.a, &start_grid, u_mode, rank_tol) {
                Ok(r) => {
                    ModelCandidate::scored(CandidateKind::Path, Some(d.lambda), d.iterations, d.residual, r)
                }
                Err(e) => ModelCandidate::failed(CandidateKind::Path, Some(d.lambda), e.to_string()),
            },
            Err(e) => {
                let lambda = match &e {
                    Error::Convergence { last, .. } => Some(last.lambda),
                    _ => None,
                };
                ModelCandidate::failed(CandidateKind::Path, lambda, e.to_string())
            }
        })
        .collect();
    for (c, &lambda) in candidates.iter_mut().zip(schedule.values()) {
        c.lambda.get_or_insert(lambda);
    }

    let mut last_rank = 0;
    for c in candidates.iter().filter(|c| c.allocation().is_some()) {
        if c.rank < last_rank {
            log::warn!(
                "rank dropped from {last_rank} to {} along the path at lambda_E={:.4e}",
                c.rank,
                c.lambda.map_or(f64::NAN, |l| l.sparse_weight())
            );
        }
        last_rank = c.rank;
    }

    let zero = refine_factors(x, None, &start_grid, u_mode)?;
    candidates.push(ModelCandidate::scored(
        CandidateKind::ZeroRank,
        None,
        0,
        0.0,
        zero,
    ));

    let full = match reduced_svd(x.values(), rank_tol) {
        Ok(f) => refine_factors(x, Some(&f), &start_grid, u_mode)
            .map(|r| ModelCandidate::scored(CandidateKind::FullRank, None, 0, 0.0, r))
            .unwrap_or_else(|e| ModelCandidate::failed(CandidateKind::FullRank, None, e.to_string())),
        Err(Error::EmptyRank) => {
            ModelCandidate::failed(CandidateKind::FullRank, None, "data matrix has rank zero".into())
        }
        Err(e) => return Err(e),
    };
    candidates.push(full);

    let best_index =
        argmin_candidate(&candidates).ok_or_else(|| Error::Pipeline("every candidate failed".into()))?;
    Ok(SelectionReport {
        candidates,
        best_index,
        schedule: schedule.clone(),
        solver: solver.clone(),
        u_mode,
        start_grid,
        rows: x.rows(),
        cols: x.cols(),
        frame_shape: x.frame_shape(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::CodeLength;
    use nalgebra::DMatrix;

    fn dummy(rank: usize, total: Option<f64>) -> ModelCandidate {
        match total {
            None => ModelCandidate::failed(CandidateKind::Path, None, "x".into()),
            Some(t) => {
                let allocation = BitAllocation::new(
                    CodeLength::ZERO,
                    CodeLength::ZERO,
                    CodeLength::ZERO,
                    CodeLength::from_bits(t),
                );
                let grid = QuantizationGrid::starting(2, 2, 1.0).unwrap();
                ModelCandidate {
                    kind: CandidateKind::Path,
                    lambda: None,
                    rank,
                    solver_iterations: 0,
                    solver_residual: 0.0,
                    outcome: CandidateOutcome::Scored {
                        allocation,
                        grid,
                        halvings: 0,
                        model: Box::new(QuantizedDecomposition {
                            low_rank: None,
                            e: DMatrix::zeros(1, 1),
                            grid,
                        }),
                    },
                }
            }
        }
    }

    #[test]
    fn argmin_breaks_ties_toward_smaller_rank() {
        let c = vec![
            dummy(3, Some(10.0)),
            dummy(1, Some(10.0)),
            dummy(0, None),
            dummy(2, Some(11.0)),
        ];
        assert_eq!(argmin_candidate(&c), Some(1));
        assert_eq!(argmin_candidate(&[dummy(0, None)]), None);
    }

    #[test]
    fn default_delta_e_rules() {
        let ints = DataMatrix::from_row_major(1, 3, &[0.0, 5.0, 255.0]).unwrap();
        assert_eq!(default_delta_e(&ints), 1.0);
        let reals = DataMatrix::from_row_major(1, 3, &[0.5, 1.0, 2.5]).unwrap();
        assert!((default_delta_e(&reals) - 2e-6).abs() < 1e-18);
    }

    #[test]
    fn predictive_mode_requires_frames() {
        let x = DataMatrix::from_row_major(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let opts = SelectionOptions {
            u_mode: Some(CoderMode::Predictive),
            ..Default::default()
        };
        let schedule = LambdaSchedule::default_for(2, 2);
        assert!(select_model(&x, &schedule, &SolverConfig::default(), &opts).is_err());
    }
}
