//! Ideal codelengths, in bits, for every part of a quantized decomposition.
//!
//! Nothing here emits a bitstream. Each coder returns `-log2` of the
//! probability its model assigns to the (quantized) data.

mod enumerative;
mod laplace;
mod matrices;
mod predictive;
mod sparse;
mod sphere;
mod total;
mod universal;

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerative::enumerative_codelength;
pub use laplace::{laplacian_two_part_codelength, LaplacianTwoPartModel};
pub use matrices::{matrix_u_codelength, matrix_v_codelength};
pub use predictive::{
    bilinear_reconstruct, bilinear_residuals, first_diff_reconstruct, first_diff_residuals,
};
pub use sparse::sparse_error_codelength;
pub use sphere::{orthocomplement_coordinates, sphere_vector_codelength, spherical_cap_cdf};
pub use total::{total_codelength, QuantizedSvd};
pub use universal::{sigma_codelength, universal_int_codelength, SIGMA_PRECISION};

/// An ideal codelength in bits. Fractional values are allowed.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CodeLength(f64);

impl CodeLength {
    pub const ZERO: CodeLength = CodeLength(0.0);

    pub fn bits(self) -> f64 {
        self.0
    }

    pub(crate) fn from_bits(bits: f64) -> Self {
        debug_assert!(bits.is_finite(), "codelength {bits}");
        CodeLength(bits.max(0.0))
    }
}

impl Add for CodeLength {
    type Output = CodeLength;
    fn add(self, rhs: CodeLength) -> CodeLength {
        CodeLength(self.0 + rhs.0)
    }
}

impl AddAssign for CodeLength {
    fn add_assign(&mut self, rhs: CodeLength) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for CodeLength {
    fn sum<I: Iterator<Item = CodeLength>>(iter: I) -> CodeLength {
        iter.fold(CodeLength::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for CodeLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// How the columns of `U` are modelled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoderMode {
    /// Uniform on the unit sphere, orthogonal to the previous columns.
    Spherical,
    /// Reshaped to frames, causal bilinear prediction, Laplacian residuals.
    Predictive,
}

impl fmt::Display for CoderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoderMode::Spherical => "spherical",
            CoderMode::Predictive => "predictive",
        })
    }
}

/// Quantization steps for each part of the model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationGrid {
    pub delta_sigma: f64,
    pub delta_u: f64,
    pub delta_v: f64,
    pub delta_e: f64,
}

impl QuantizationGrid {
    pub fn new(delta_u: f64, delta_v: f64, delta_e: f64) -> Result<Self> {
        let grid = Self {
            delta_sigma: SIGMA_PRECISION,
            delta_u,
            delta_v,
            delta_e,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// `delta_u = sqrt(1/m)`, `delta_v = sqrt(1/n)`: the spread of one
    /// coordinate of a random unit vector.
    pub fn starting(rows: usize, cols: usize, delta_e: f64) -> Result<Self> {
        Self::new((1.0 / rows as f64).sqrt(), (1.0 / cols as f64).sqrt(), delta_e)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, d) in [
            ("delta_sigma", self.delta_sigma),
            ("delta_u", self.delta_u),
            ("delta_v", self.delta_v),
            ("delta_e", self.delta_e),
        ] {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {d}")));
            }
        }
        Ok(())
    }

    /// The same grid with `delta_u` and `delta_v` halved.
    pub fn halved(&self) -> Self {
        Self {
            delta_u: self.delta_u * 0.5,
            delta_v: self.delta_v * 0.5,
            ..*self
        }
    }
}

/// Codelength of each part of the description and their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BitAllocation {
    pub l_u: CodeLength,
    pub l_sigma: CodeLength,
    pub l_v: CodeLength,
    pub l_e: CodeLength,
    pub total: CodeLength,
}

impl BitAllocation {
    pub fn new(l_u: CodeLength, l_sigma: CodeLength, l_v: CodeLength, l_e: CodeLength) -> Self {
        Self {
            l_u,
            l_sigma,
            l_v,
            l_e,
            total: l_u + l_sigma + l_v + l_e,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allocation_total_is_the_sum() {
        let b = BitAllocation::new(
            CodeLength::from_bits(1.5),
            CodeLength::from_bits(2.25),
            CodeLength::from_bits(0.125),
            CodeLength::from_bits(10.0),
        );
        assert!((b.total.bits() - 13.875).abs() < 1e-12);
    }

    #[test]
    fn grid_validation_and_halving() {
        assert!(QuantizationGrid::new(0.1, 0.0, 1.0).is_err());
        assert!(QuantizationGrid::new(0.1, 0.2, f64::NAN).is_err());
        let g = QuantizationGrid::starting(400, 100, 1.0).unwrap();
        assert_eq!(g.delta_u, 0.05);
        assert_eq!(g.delta_v, 0.1);
        assert_eq!(g.delta_sigma, 1e-16);
        let h = g.halved();
        assert_eq!((h.delta_u, h.delta_v, h.delta_e), (0.025, 0.05, 1.0));
    }
}
