use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::matrix_csv::{format_exact, save_matrix_csv};
use super::pgm::{export_frames, write_pgm, GrayImage};
use super::{FrameStackManifest, ReportFile};
use crate::error::{Error, Result};
use crate::numerics::FrameShape;
use crate::select::{CandidateKind, SelectionReport};

/// Offset added to the error part so signed values fit in an unsigned pixel.
pub const FOREGROUND_OFFSET: f64 = 128.0;

/// Paths written by [`export_artifacts`], relative to the output directory.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExportedFiles {
    pub files: Vec<PathBuf>,
}

/// Rescale to 0..=255 by min and max; a constant column maps to mid-gray.
fn rescale_to_pixels(column: &[f64], shape: FrameShape) -> GrayImage {
    let (lo, hi) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let pixels = column
        .iter()
        .map(|&v| {
            if hi > lo {
                (255.0 * (v - lo) / (hi - lo)).round() as u8
            } else {
                128
            }
        })
        .collect();
    GrayImage { shape, pixels }
}

fn kind_label(kind: CandidateKind) -> &'static str {
    match kind {
        CandidateKind::Path => "path",
        CandidateKind::ZeroRank => "zero_rank",
        CandidateKind::FullRank => "full_rank",
    }
}

fn write_curve(report: &SelectionReport, path: &Path) -> Result<()> {
    let fail = |e: csv::Error| Error::format(path, e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(["kind", "lambda", "rank", "l_u", "l_sigma", "l_v", "l_e", "total"])
        .map_err(fail)?;
    for c in &report.candidates {
        let lambda = c
            .lambda
            .map(|l| format_exact(l.sparse_weight()))
            .unwrap_or_default();
        let bits: Vec<String> = match c.allocation() {
            Some(a) => [a.l_u, a.l_sigma, a.l_v, a.l_e, a.total]
                .iter()
                .map(|b| format_exact(b.bits()))
                .collect(),
            None => vec![String::new(); 5],
        };
        let mut row = vec![kind_label(c.kind).to_string(), lambda, c.rank.to_string()];
        row.extend(bits);
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write the selection curve, the chosen model's factors and
/// reconstructions, and `report.json` into `out_dir`.
pub fn export_artifacts(
    report: &SelectionReport,
    manifest: Option<&FrameStackManifest>,
    out_dir: &Path,
) -> Result<ExportedFiles> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut out = ExportedFiles::default();
    let mut record = |rel: PathBuf| out.files.push(rel);

    write_curve(report, &out_dir.join("curve.csv"))?;
    record("curve.csv".into());

    let best = report.best();
    let model = best
        .model()
        .ok_or_else(|| Error::Pipeline("best candidate has no model".into()))?;

    let (n, k) = (report.cols, model.rank());
    let mut courses = DMatrix::zeros(k, n);
    if let Some(q) = &model.low_rank {
        for i in 0..k {
            courses
                .row_mut(i)
                .copy_from(&(q.v.column(i).transpose() * q.sigma[i]));
        }
    }
    if k > 0 {
        save_matrix_csv(&courses, &out_dir.join("timecourses.csv"))?;
    } else {
        fs::write(out_dir.join("timecourses.csv"), "").map_err(|e| Error::io(out_dir, e))?;
    }
    record("timecourses.csv".into());

    match report.frame_shape {
        None => log::warn!("no frame shape; skipping eigen-frame and frame exports"),
        Some(shape) => {
            if let Some(q) = &model.low_rank {
                for i in 0..k {
                    let col: Vec<f64> = q.u.column(i).iter().copied().collect();
                    let name = format!("eigenframe_{}.pgm", i + 1);
                    write_pgm(&out_dir.join(&name), &rescale_to_pixels(&col, shape))?;
                    record(name.into());
                }
            }
            for (sub, m) in [
                ("background", model.low_rank_on_lattice()),
                ("foreground", model.e.add_scalar(FOREGROUND_OFFSET)),
            ] {
                let dir = out_dir.join(sub);
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                for name in export_frames(&m, shape, &dir, "frame_")? {
                    record(Path::new(sub).join(name));
                }
            }
        }
    }

    ReportFile::new(report, manifest).save(&out_dir.join("report.json"))?;
    record("report.json".into());
    Ok(out)
}
