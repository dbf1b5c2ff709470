//! Gauss hypergeometric function ₂F₁(a, b; c; z) on the non-positive axis.

use super::special::{gamma, rgamma};
use super::NumericsError;

const SERIES_EPS: f64 = 1e-17;
const MAX_TERMS: usize = 2_000_000;

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Direct power series, for `|z| < 1`.
fn series(a: f64, b: f64, c: f64, z: f64) -> Result<f64, NumericsError> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() {
            return Ok(sum);
        }
        if term == 0.0 {
            return Ok(sum);
        }
    }
    Err(NumericsError::NoConvergence {
        subdivisions: MAX_TERMS,
        value: sum,
        error: term.abs(),
    })
}

/// Pfaff transformation onto `w = z/(z-1) ∈ [0, 1)`.
fn pfaff(a: f64, b: f64, c: f64, z: f64) -> Result<f64, NumericsError> {
    let w = z / (z - 1.0);
    Ok((1.0 - z).powf(-a) * series(a, c - b, c, w)?)
}

/// ₂F₁(a, b; c; z) for `z ≤ 0`.
///
/// Uses the power series on `[-1/2, 0]`, the Pfaff transformation on
/// `[-1, -1/2)` and the `1/z` connection formula below `-1`. When `a - b`
/// is an integer the connection formula degenerates and the Pfaff series is
/// summed directly instead.
pub fn hyp2f1_neg(a: f64, b: f64, c: f64, z: f64) -> Result<f64, NumericsError> {
    if !(z <= 0.0) {
        return Err(NumericsError::Domain(format!(
            "hyp2f1_neg needs z <= 0, got {z}"
        )));
    }
    if is_non_positive_integer(c) {
        return Err(NumericsError::Domain(format!(
            "c = {c} is a non-positive integer"
        )));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if z >= -0.5 {
        return series(a, b, c, z);
    }
    if z >= -1.0 {
        return pfaff(a, b, c, z);
    }
    let ab = a - b;
    if (ab - ab.round()).abs() < 1e-9 {
        return pfaff(a, b, c, z);
    }
    let inv = 1.0 / z;
    let t1 = gamma(c) * gamma(b - a) * rgamma(b) * rgamma(c - a);
    let t2 = gamma(c) * gamma(a - b) * rgamma(a) * rgamma(c - b);
    let mut out = 0.0;
    if t1 != 0.0 {
        out += t1 * (-z).powf(-a) * hyp2f1_neg(a, a - c + 1.0, a - b + 1.0, inv)?;
    }
    if t2 != 0.0 {
        out += t2 * (-z).powf(-b) * hyp2f1_neg(b, b - c + 1.0, b - a + 1.0, inv)?;
    }
    Ok(out)
}
