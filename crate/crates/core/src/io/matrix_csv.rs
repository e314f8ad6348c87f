use std::fs::File;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::DataMatrix;

/// Shortest decimal text that parses back to exactly `v`. Plain notation in
/// the usual range, scientific outside it.
pub fn format_exact(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        },
        _ => Error::format(path, e.to_string()),
    }
}

/// Read a headerless, comma-separated matrix of finite reals.
pub fn load_matrix_csv(path: &Path) -> Result<DataMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut entries = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = rows + 1;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::format(
                    path,
                    format!("row {row} has {} fields, expected {c}", record.len()),
                ))
            }
            _ => {}
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::format(
                    path,
                    format!("row {row}, column {}: {cell:?} is not a number", j + 1),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::format(
                    path,
                    format!("row {row}, column {}: non-finite value", j + 1),
                ));
            }
            entries.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::format(path, "no rows"))?;
    DataMatrix::from_row_major(rows, cols, &entries)
}

/// Write `m` one row per line, every value in round-trip exact text.
pub fn save_matrix_csv(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    for i in 0..m.nrows() {
        writer
            .write_record(m.row(i).iter().map(|&v| format_exact(v)))
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
