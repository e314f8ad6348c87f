use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Height and width of an image whose raster (row-major) flattening is one
/// column of a data matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameShape {
    pub height: usize,
    pub width: usize,
}

impl FrameShape {
    pub fn new(height: usize, width: usize) -> Self {
        Self { height, width }
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }
}

/// The observed matrix. Columns are samples (for video, flattened frames).
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    frame_shape: Option<FrameShape>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidInput(format!(
                "data matrix must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % values.nrows(), pos / values.nrows());
            return Err(Error::InvalidInput(format!(
                "non-finite entry at row {}, column {}",
                r + 1,
                c + 1
            )));
        }
        Ok(Self {
            values,
            frame_shape: None,
        })
    }

    /// Build from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn with_frame_shape(mut self, shape: FrameShape) -> Result<Self> {
        if shape.pixels() != self.rows() {
            return Err(Error::InvalidInput(format!(
                "frame shape {}x{} does not match {} rows",
                shape.height,
                shape.width,
                self.rows()
            )));
        }
        self.frame_shape = Some(shape);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn frame_shape(&self) -> Option<FrameShape> {
        self.frame_shape
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    /// True when every entry is an integer, e.g. raw 8-bit pixels.
    pub fn is_integer_valued(&self) -> bool {
        self.values.iter().all(|v| v.fract() == 0.0)
    }

    pub(crate) fn check_same_shape(&self, other: &DMatrix<f64>, what: &str) -> Result<()> {
        if other.shape() != self.values.shape() {
            return Err(Error::InvalidInput(format!(
                "{what} is {}x{}, data matrix is {}x{}",
                other.nrows(),
                other.ncols(),
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(DataMatrix::new(DMatrix::zeros(0, 3)).is_err());
        let mut m = DMatrix::zeros(2, 2);
        m[(1, 0)] = f64::INFINITY;
        let err = DataMatrix::new(m).unwrap_err().to_string();
        assert!(err.contains("row 2, column 1"), "{err}");
    }

    #[test]
    fn frame_shape_must_match_rows() {
        let x = DataMatrix::from_row_major(4, 1, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(x.clone().with_frame_shape(FrameShape::new(2, 2)).is_ok());
        assert!(x.with_frame_shape(FrameShape::new(3, 2)).is_err());
    }

    #[test]
    fn row_major_layout() {
        let x = DataMatrix::from_row_major(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(x.values()[(0, 1)], 2.0);
        assert_eq!(x.values()[(1, 0)], 3.0);
        assert!(x.is_integer_valued());
    }
}
