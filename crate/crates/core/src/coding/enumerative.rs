use std::f64::consts::LN_2;

use super::CodeLength;
use crate::error::{Error, Result};
use crate::numerics::ln_gamma_pos;

/// `log2 C(n, k)` through log-Gamma, exact zero at the ends.
pub(crate) fn log2_binomial(n: usize, k: usize) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    let (n, k) = (n as f64, k as f64);
    let ln = ln_gamma_pos(n + 1.0) - ln_gamma_pos(k + 1.0) - ln_gamma_pos(n - k + 1.0);
    (ln / LN_2).max(0.0)
}

/// Enumerative code for a binary support of length `n` with `k` ones: the
/// weight uniformly over `0..=n`, then the index of the support among all
/// `C(n, k)` patterns of that weight.
pub fn enumerative_codelength(n: usize, k: usize) -> Result<CodeLength> {
    if k > n {
        return Err(Error::Domain(format!("support size {k} exceeds length {n}")));
    }
    Ok(CodeLength::from_bits(
        ((n + 1) as f64).log2() + log2_binomial(n, k),
    ))
}
