use super::CodeLength;
use crate::error::{Error, Result};

/// Quantization step for singular values.
pub const SIGMA_PRECISION: f64 = 1e-16;

/// log2(2.865); makes the integer code satisfy Kraft's inequality.
fn kraft_constant() -> f64 {
    2.865f64.log2()
}

/// `log2 j + log2 log2 j + ...` over the positive terms, plus `log2 2.865`.
/// Takes `j` as a float so integers beyond `u64` (large singular values at
/// 1e-16 precision) can be coded.
pub(crate) fn log_star_bits(j: f64) -> f64 {
    debug_assert!(j >= 1.0);
    let mut sum = 0.0;
    let mut t = j.log2();
    while t > 0.0 {
        sum += t;
        t = t.log2();
    }
    sum + kraft_constant()
}

/// Codelength of a positive integer under the universal prior for integers.
pub fn universal_int_codelength(j: u64) -> Result<CodeLength> {
    if j == 0 {
        return Err(Error::Domain("universal integer code requires j >= 1".into()));
    }
    Ok(CodeLength::from_bits(log_star_bits(j as f64)))
}

/// Each singular value is mapped to `round(1e16 * sigma)` and coded with the
/// universal integer code.
pub fn sigma_codelength(sigma: &[f64]) -> Result<CodeLength> {
    let mut bits = 0.0;
    for &s in sigma {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidInput(format!(
                "singular values must be positive and finite, got {s}"
            )));
        }
        let j = (s / SIGMA_PRECISION).round();
        if j < 1.0 {
            return Err(Error::Underflow { value: s });
        }
        bits += log_star_bits(j);
    }
    Ok(CodeLength::from_bits(bits))
}
