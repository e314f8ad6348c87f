//! Coding unit vectors that are uniform on a sphere.
//!
//! The first coordinate of a uniform point on the unit sphere in `R^m` has
//! CDF `F(u) = I(1 - u^2; (m-1)/2, 1/2) / 2` for `u <= 0` (the normalized
//! area of a spherical cap), and `1 - F(-u)` above zero. Coordinates are
//! coded one at a time; once `u_1..u_t` are known the rest lie on a sphere
//! of radius `sqrt(1 - sum u_i^2)` one dimension lower.

use nalgebra::{DMatrix, DVector};

use super::CodeLength;
use crate::error::{Error, Result};
use crate::numerics::{ln_beta, reg_inc_beta};

/// Below this normalized width the CDF difference loses more precision than
/// a midpoint-density estimate.
const NARROW_BIN: f64 = 1e-7;

fn beta_or_panic(x: f64, a: f64, b: f64) -> f64 {
    reg_inc_beta(x, a, b).expect("arguments within domain by construction")
}

/// Marginal law of one coordinate of a uniform point on the sphere in `R^dim`.
#[derive(Clone, Copy, Debug)]
struct CapLaw {
    /// `(dim - 1) / 2`
    a: f64,
}

impl CapLaw {
    fn new(dim: usize) -> Self {
        debug_assert!(dim >= 2);
        Self {
            a: (dim as f64 - 1.0) / 2.0,
        }
    }

    /// `P(0 <= X <= t)` for `t` in `[0, 1]`.
    fn half_central(&self, t: f64) -> f64 {
        if t * t < 0.5 {
            0.5 * beta_or_panic(t * t, 0.5, self.a)
        } else {
            0.5 - self.tail(t)
        }
    }

    /// `P(X >= t)` for `t` in `[0, 1]`.
    fn tail(&self, t: f64) -> f64 {
        if t * t < 0.5 {
            0.5 - self.half_central(t)
        } else {
            0.5 * beta_or_panic((1.0 - t) * (1.0 + t), self.a, 0.5)
        }
    }

    fn cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            self.tail(-u)
        } else {
            1.0 - self.tail(u)
        }
    }

    fn density(&self, x: f64) -> f64 {
        ((self.a - 1.0) * ((1.0 - x) * (1.0 + x)).ln() - ln_beta(self.a, 0.5)).exp()
    }

    /// `P(lo <= X <= hi)` for `-1 <= lo < hi <= 1`.
    fn mass(&self, lo: f64, hi: f64) -> f64 {
        let width = hi - lo;
        if width < NARROW_BIN && lo > -1.0 && hi < 1.0 {
            return self.density(0.5 * (lo + hi)) * width;
        }
        let p = if lo >= 0.0 {
            self.between(lo, hi)
        } else if hi <= 0.0 {
            self.between(-hi, -lo)
        } else {
            self.half_central(-lo) + self.half_central(hi)
        };
        if p > 0.0 {
            p
        } else {
            // Cancellation or underflow far in the tail.
            (self.density(0.5 * (lo + hi)) * width).max(f64::MIN_POSITIVE)
        }
    }

    /// `P(lo <= X <= hi)` for `0 <= lo < hi <= 1`.
    fn between(&self, lo: f64, hi: f64) -> f64 {
        if hi * hi < 0.5 {
            self.half_central(hi) - self.half_central(lo)
        } else {
            self.tail(lo) - self.tail(hi)
        }
    }
}

/// CDF of the first coordinate of a uniform point on the unit sphere in `R^m`.
pub fn spherical_cap_cdf(u: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("sphere dimension must be >= 2, got {m}")));
    }
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("coordinate must lie in [-1, 1], got {u}")));
    }
    Ok(CapLaw::new(m).cdf(u))
}

/// Codelength of a unit vector quantized coordinate by coordinate with step
/// `delta`, each coordinate coded under its conditional marginal given the
/// quantized values before it. The final coordinate costs one sign bit.
pub fn sphere_vector_codelength(u: &[f64], delta: f64) -> Result<CodeLength> {
    if u.is_empty() {
        return Err(Error::InvalidInput("cannot code an empty vector".into()));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!("vector norm is {norm}, expected 1")));
    }
    Ok(CodeLength::from_bits(sphere_bits(u, delta)))
}

pub(crate) fn sphere_bits(u: &[f64], delta: f64) -> f64 {
    let d = u.len();
    let mut bits = 0.0;
    let mut r2 = 1.0f64;
    for (t, &value) in u.iter().enumerate().take(d - 1) {
        if r2 <= 0.0 {
            break;
        }
        let r = r2.sqrt();
        let law = CapLaw::new(d - t);

        // Largest level whose bin still overlaps (-r, r).
        let mut qmax = (r / delta + 0.5).floor();
        if qmax * delta - 0.5 * delta >= r {
            qmax -= 1.0;
        }
        let q = (value / delta).round().clamp(-qmax, qmax);
        let center = q * delta;
        let lo = ((center - 0.5 * delta) / r).max(-1.0);
        let hi = ((center + 0.5 * delta) / r).min(1.0);
        bits -= law.mass(lo, hi).log2();
        r2 = (r2 - center * center).max(0.0);
    }
    bits + 1.0
}

/// Applies a sequence of Householder reflections built column by column.
///
/// Reflector `j` depends only on columns `0..=j`, so the coordinates of
/// column `i` in the complement of the first `i` columns are available to a
/// decoder that already knows those columns.
struct HouseholderSweep {
    reflectors: Vec<DVector<f64>>,
}

impl HouseholderSweep {
    fn new() -> Self {
        Self {
            reflectors: Vec::new(),
        }
    }

    /// Reflect `x` (full length `m`) by all stored reflectors in order.
    fn apply(&self, x: &mut DVector<f64>) {
        for (j, v) in self.reflectors.iter().enumerate() {
            let vv = v.norm_squared();
            if vv == 0.0 {
                continue;
            }
            let mut tail = x.rows_mut(j, v.len());
            let s = 2.0 * v.dot(&tail) / vv;
            tail.axpy(-s, v, 1.0);
        }
    }

    /// Add the reflector that maps the tail of an already-reflected column
    /// onto the next canonical axis.
    fn push(&mut self, reflected: &DVector<f64>) {
        let j = self.reflectors.len();
        let x = reflected.rows(j, reflected.len() - j).into_owned();
        let norm = x.norm();
        let mut v = x;
        if norm > 0.0 {
            let alpha = if v[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
        }
        self.reflectors.push(v);
    }
}

/// Coordinates of `u` in a fixed orthonormal basis of the orthogonal
/// complement of `prev_cols`.
pub fn orthocomplement_coordinates(prev_cols: &DMatrix<f64>, u: &[f64]) -> Result<DVector<f64>> {
    let m = u.len();
    if prev_cols.nrows() != m && prev_cols.ncols() > 0 {
        return Err(Error::InvalidInput(format!(
            "previous columns have {} rows, vector has {m}",
            prev_cols.nrows()
        )));
    }
    let p = prev_cols.ncols();
    if p >= m {
        return Err(Error::InvalidInput(format!(
            "{p} previous columns leave no complement in R^{m}"
        )));
    }
    let gram = prev_cols.transpose() * prev_cols;
    if (gram - DMatrix::identity(p, p)).amax() > 1e-8 {
        return Err(Error::InvalidInput("previous columns are not orthonormal".into()));
    }
    let uv = DVector::from_column_slice(u);
    if (uv.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput("vector is not unit norm".into()));
    }
    if p > 0 && (prev_cols.transpose() * &uv).amax() > 1e-6 {
        return Err(Error::InvalidInput(
            "vector is not orthogonal to the previous columns".into(),
        ));
    }
    let mut sweep = HouseholderSweep::new();
    for j in 0..p {
        let mut col = prev_cols.column(j).into_owned();
        sweep.apply(&mut col);
        sweep.push(&col);
    }
    let mut x = uv;
    sweep.apply(&mut x);
    let mut tail = x.rows(p, m - p).into_owned();
    let n = tail.norm();
    tail /= n;
    Ok(tail)
}

/// Spherical codelength of all columns of an orthonormal `u`, each coded in
/// the complement of the columns before it.
pub(crate) fn spherical_matrix_bits(u: &DMatrix<f64>, delta: f64) -> f64 {
    let (m, k) = u.shape();
    let mut sweep = HouseholderSweep::new();
    let mut bits = 0.0;
    for i in 0..k {
        let mut col = u.column(i).into_owned();
        sweep.apply(&mut col);
        let mut tail = col.rows(i, m - i).into_owned();
        let n = tail.norm();
        if n > 0.0 {
            tail /= n;
        }
        bits += sphere_bits(tail.as_slice(), delta);
        if i + 1 < k {
            sweep.push(&col);
        }
    }
    bits
}
