//! ∫₀^{2π}∫_{r_lo}^{r_hi} f(r,φ) r/(1+f(r,φ)) dr dφ with
//! `f = γ l(ρ)/l(d)` and `ρ² = r² + d² - 2rd cos φ`.
//!
//! φ is integrated innermost with a fixed periodic trapezoid rule (the
//! integrand is smooth and 2π-periodic, so the rule converges
//! geometrically); r is integrated adaptively.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::quadrature::{integrate, semi_infinite_map, Tolerance};
use super::NumericsError;
use crate::model::PathlossModel;

/// Trapezoid points on the full circle.
pub const PHI_NODES: usize = 128;

fn phi_rule(n: usize) -> Vec<(f64, f64)> {
    // even integrand: fold onto [0, π]
    let h = 2.0 * PI / n as f64;
    (0..=n / 2)
        .map(|k| {
            let w = if k == 0 || k == n / 2 { h } else { 2.0 * h };
            ((k as f64 * h).cos(), w)
        })
        .collect()
}

fn default_phi_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| phi_rule(PHI_NODES))
}

fn angular_sum(rule: &[(f64, f64)], gamma: f64, r: f64, d: f64, half_exp: f64) -> f64 {
    let d_sq = d * d;
    let base = r * r + d_sq;
    let two_rd = 2.0 * r * d;
    let mut acc = 0.0;
    for &(cos_phi, w) in rule {
        let rho_sq = (base - two_rd * cos_phi).max(0.0);
        // f/(1+f) = γ / (γ + (ρ/d)^a)
        acc += w * gamma / (gamma + (rho_sq / d_sq).powf(half_exp));
    }
    acc * r
}

pub fn annulus_integral(
    gamma: f64,
    d: f64,
    r_lo: f64,
    r_hi: f64,
    model: &PathlossModel,
    tol: Tolerance,
) -> Result<f64, NumericsError> {
    annulus_integral_with(gamma, d, r_lo, r_hi, model, tol, PHI_NODES)
}

/// As [`annulus_integral`] with an explicit number of φ nodes. `r_hi` may be
/// `f64::INFINITY`.
pub fn annulus_integral_with(
    gamma: f64,
    d: f64,
    r_lo: f64,
    r_hi: f64,
    model: &PathlossModel,
    tol: Tolerance,
    phi_nodes: usize,
) -> Result<f64, NumericsError> {
    if !(gamma >= 0.0) || !(d > 0.0) || !(r_lo >= 0.0) || !(r_hi >= r_lo) {
        return Err(NumericsError::Domain(format!(
            "annulus integral needs gamma >= 0, d > 0, 0 <= r_lo <= r_hi \
             (gamma={gamma}, d={d}, r_lo={r_lo}, r_hi={r_hi})"
        )));
    }
    if gamma == 0.0 || r_hi == r_lo {
        return Ok(0.0);
    }
    let owned;
    let rule: &[(f64, f64)] = if phi_nodes == PHI_NODES {
        default_phi_rule()
    } else {
        owned = phi_rule(phi_nodes);
        &owned
    };
    let half_exp = 0.5 * model.exponent();
    if r_hi.is_finite() {
        return integrate(
            |r| angular_sum(rule, gamma, r, d, half_exp),
            r_lo,
            r_hi,
            tol,
        )
        .map(|e| e.value);
    }
    let scale = r_lo.max(d);
    integrate(
        |t| {
            let (s, jac) = semi_infinite_map(t);
            let v = angular_sum(rule, gamma, r_lo + scale * s, d, half_exp);
            if v == 0.0 {
                0.0
            } else {
                v * scale * jac
            }
        },
        0.0,
        1.0,
        tol,
    )
    .map(|e| e.value)
}
