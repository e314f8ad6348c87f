use serde::{Deserialize, Serialize};

use super::CodeLength;
use crate::error::{Error, Result};

/// Two-part Laplacian model fitted to one sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplacianTwoPartModel {
    /// Maximum-likelihood scale: the mean absolute residual.
    pub theta_hat: f64,
    /// `0.5 * log2(N)` for a sequence of length `N`.
    pub param_bits: f64,
}

/// Codelength of integer quantization levels `k_i` (values `k_i * delta`)
/// under a Laplacian with ML scale, discretized to bins of width `delta`
/// centred on the lattice, plus the parameter cost.
///
/// With `s = mean|k|` the scale in lattice units, the zero bin has mass
/// `1 - exp(-1/(2s))` and the bin at `k != 0` has mass
/// `exp(-(|k| - 1/2)/s) * (1 - exp(-1/s)) / 2`, so the total only depends
/// on the count of zeros and `sum |k|`.
pub(crate) fn laplace_levels_bits(n: usize, zeros: usize, abs_sum: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let param_bits = 0.5 * (n as f64).log2();
    if abs_sum == 0.0 {
        return (param_bits, 0.0);
    }
    let s = abs_sum / n as f64;
    let log2e = std::f64::consts::LOG2_E;
    let zero_bits = -(-(-0.5 / s).exp_m1()).log2();
    let tail_bits = 1.0 - (-(-1.0 / s).exp_m1()).log2() - 0.5 * log2e / s;
    let nonzero = (n - zeros) as f64;
    let data = zeros as f64 * zero_bits + nonzero * tail_bits + log2e * abs_sum / s;
    (param_bits, data)
}

/// Accumulate zero count and `sum |k|` over integer levels.
pub(crate) fn level_stats<I: IntoIterator<Item = i64>>(levels: I) -> (usize, usize, f64) {
    let mut n = 0;
    let mut zeros = 0;
    let mut abs_sum = 0.0;
    for k in levels {
        n += 1;
        if k == 0 {
            zeros += 1;
        } else {
            abs_sum += k.unsigned_abs() as f64;
        }
    }
    (n, zeros, abs_sum)
}

/// Two-part Laplacian codelength of `residuals` quantized to multiples of
/// `delta`. An all-zero sequence costs only the parameter.
pub fn laplacian_two_part_codelength(
    residuals: &[f64],
    delta: f64,
) -> Result<(CodeLength, LaplacianTwoPartModel)> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if residuals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("residuals must be finite".into()));
    }
    let (n, zeros, abs_sum) = level_stats(residuals.iter().map(|&x| (x / delta).round() as i64));
    let (param_bits, data_bits) = laplace_levels_bits(n, zeros, abs_sum);
    let theta_hat = if n == 0 { 0.0 } else { abs_sum * delta / n as f64 };
    Ok((
        CodeLength::from_bits(param_bits + data_bits),
        LaplacianTwoPartModel {
            theta_hat,
            param_bits,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bin mass straight from the Laplacian CDF.
    fn laplace_cdf(x: f64, theta: f64) -> f64 {
        if x < 0.0 {
            0.5 * (x / theta).exp()
        } else {
            1.0 - 0.5 * (-x / theta).exp()
        }
    }

    fn brute_force(levels: &[i64], delta: f64) -> f64 {
        let n = levels.len() as f64;
        let theta = levels.iter().map(|k| k.abs() as f64 * delta).sum::<f64>() / n;
        let data: f64 = levels
            .iter()
            .map(|&k| {
                let x = k as f64 * delta;
                let p = laplace_cdf(x + delta / 2.0, theta) - laplace_cdf(x - delta / 2.0, theta);
                -p.log2()
            })
            .sum();
        0.5 * n.log2() + data
    }

    fn brute_force_zero_free(levels: &[i64], delta: f64, theta: f64) -> f64 {
        levels
            .iter()
            .map(|&k| {
                let x = k as f64 * delta;
                -(laplace_cdf(x + delta / 2.0, theta) - laplace_cdf(x - delta / 2.0, theta)).log2()
            })
            .sum()
    }

    #[test]
    fn theta_is_mean_magnitude() {
        let (_, model) = laplacian_two_part_codelength(&[1.0, -1.0, 2.0], 1.0).unwrap();
        assert!((model.theta_hat - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn all_zero_costs_only_the_parameter() {
        let (bits, model) = laplacian_two_part_codelength(&[0.0; 100], 0.25).unwrap();
        assert_eq!(bits.bits(), 0.5 * 100f64.log2());
        assert_eq!(model.theta_hat, 0.0);
    }

    #[test]
    fn central_bin_mass() {
        // Levels (0, 2, 3, -3) at delta = 0.5 have mean magnitude exactly 1.
        let (n, zeros, abs_sum) = (4usize, 1usize, 8.0);
        let (param, data) = laplace_levels_bits(n, zeros, abs_sum);
        let s: f64 = abs_sum / n as f64;
        assert_eq!(s * 0.5, 1.0);
        let zero_bits = -(1.0 - (-0.25f64).exp()).log2();
        assert!((zero_bits - 2.177).abs() < 1e-3);
        let want = brute_force(&[0, 2, 3, -3], 0.5);
        assert!((param + data - want).abs() < 1e-9);
        let others = brute_force(&[0, 2, 3, -3], 0.5) - brute_force_zero_free(&[2, 3, -3], 0.5, 1.0) - param;
        assert!((others - 2.177).abs() < 1e-3, "{others}");
    }

    #[test]
    fn closed_form_matches_brute_force() {
        let seqs: [&[i64]; 4] = [&[0, 1, -1, 5, 0, 0, 2], &[3], &[-7, 7, 0], &[1, 1, 1, 1, 40]];
        for levels in seqs {
            for delta in [1.0, 0.1, 3.0] {
                let xs: Vec<f64> = levels.iter().map(|&k| k as f64 * delta).collect();
                let (bits, _) = laplacian_two_part_codelength(&xs, delta).unwrap();
                let want = brute_force(levels, delta);
                assert!((bits.bits() - want).abs() < 1e-9, "{levels:?} {delta}");
            }
        }
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(laplacian_two_part_codelength(&[1.0], 0.0).is_err());
        assert!(laplacian_two_part_codelength(&[f64::NAN], 1.0).is_err());
    }
}
