use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FrameStackManifest;
use crate::coding::{BitAllocation, CoderMode, QuantizationGrid};
use crate::error::{Error, Result};
use crate::numerics::FrameShape;
use crate::select::{CandidateKind, CandidateOutcome, ModelCandidate, SelectionReport};
use crate::solver::SolverConfig;

/// One candidate as stored in `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub kind: CandidateKind,
    /// Weight on the `l1` term; absent for the reference candidates.
    pub lambda: Option<f64>,
    pub rank: usize,
    pub allocation: Option<BitAllocation>,
    pub grid: Option<QuantizationGrid>,
    pub halvings: Option<usize>,
    pub solver_iterations: Option<usize>,
    pub solver_residual: Option<f64>,
    pub failure: Option<String>,
}

impl From<&ModelCandidate> for CandidateRecord {
    fn from(c: &ModelCandidate) -> Self {
        let solved = c.kind == CandidateKind::Path;
        let mut record = Self {
            kind: c.kind,
            lambda: c.lambda.map(|l| l.sparse_weight()),
            rank: c.rank,
            allocation: None,
            grid: None,
            halvings: None,
            solver_iterations: None,
            solver_residual: None,
            failure: None,
        };
        match &c.outcome {
            CandidateOutcome::Scored {
                allocation,
                grid,
                halvings,
                ..
            } => {
                record.allocation = Some(*allocation);
                record.grid = Some(*grid);
                record.halvings = Some(*halvings);
                if solved {
                    record.solver_iterations = Some(c.solver_iterations);
                    record.solver_residual = Some(c.solver_residual);
                }
            }
            CandidateOutcome::Failed { reason } => record.failure = Some(reason.clone()),
        }
        record
    }
}

/// Serializable summary of a [`SelectionReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub rows: usize,
    pub cols: usize,
    pub frame_shape: Option<FrameShape>,
    pub u_mode: CoderMode,
    /// Weights on the `l1` term in sweep order.
    pub schedule: Vec<f64>,
    pub solver: SolverConfig,
    pub start_grid: QuantizationGrid,
    pub best_index: usize,
    pub candidates: Vec<CandidateRecord>,
    pub source: Option<FrameStackManifest>,
}

impl ReportFile {
    pub fn new(report: &SelectionReport, source: Option<&FrameStackManifest>) -> Self {
        Self {
            rows: report.rows,
            cols: report.cols,
            frame_shape: report.frame_shape,
            u_mode: report.u_mode,
            schedule: report
                .schedule
                .values()
                .iter()
                .map(|l| l.sparse_weight())
                .collect(),
            solver: report.solver.clone(),
            start_grid: report.start_grid,
            best_index: report.best_index,
            candidates: report.candidates.iter().map(CandidateRecord::from).collect(),
            source: source.cloned(),
        }
    }

    pub fn best(&self) -> &CandidateRecord {
        &self.candidates[self.best_index]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}
