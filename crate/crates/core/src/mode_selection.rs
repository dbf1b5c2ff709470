//! Threshold-based mode selection mapped onto a Matérn type-II hardcore
//! process: hardcore distance, retention fraction, cellular-mode load and
//! BS activity.

use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

use crate::model::{ModeSelectionOutcome, OperatorParams, PathlossModel, Scenario, SharedParams};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModeSelectionError {
    #[error("multi-operator and intra-operator D2D densities are both zero")]
    BothZero,
}

/// Distance at which one interferer at power `pt_dbm` is received exactly
/// at the threshold `eps_dbm`. Received power falls below the threshold
/// iff the separation exceeds this distance.
pub fn hardcore_distance(eps_dbm: f64, pt_dbm: f64, model: &PathlossModel) -> f64 {
    model.invert(pt_dbm - eps_dbm)
}

/// Matérn type-II retention probability `(1 - e^{-λπδ²}) / (λπδ²)`.
pub fn retention(lambda: f64, delta: f64) -> f64 {
    let x = lambda * PI * delta * delta;
    if x < 1e-8 {
        // series keeps the limit at x = 0 exact and avoids cancellation
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Density of users served in cellular mode and the resulting BS activity
/// probability `min(1, load / λ_b)`.
pub fn cellular_mode_load(
    op: &OperatorParams,
    shared: &SharedParams,
    q_d: f64,
    q: f64,
) -> (f64, f64) {
    let load = op.lambda_c + (1.0 - q_d) * op.lambda_d + (1.0 - q) * shared.lambda / 2.0;
    (load, (load / op.lambda_b).min(1.0))
}

/// `w = λ / (λ + 2λ_d)`.
pub fn multiop_ratio(lambda: f64, lambda_d: f64) -> Result<f64, ModeSelectionError> {
    let denom = lambda + 2.0 * lambda_d;
    if denom <= 0.0 {
        return Err(ModeSelectionError::BothZero);
    }
    Ok(lambda / denom)
}

/// Mode-selection outcomes of one operator in its intra-operator band and
/// in the shared band. Both carry the operator's cellular load and α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorModes {
    pub intra: ModeSelectionOutcome,
    pub shared: ModeSelectionOutcome,
}

/// Runs mode selection for operator `i` of a validated scenario.
pub fn select_modes(scenario: &Scenario, i: usize) -> OperatorModes {
    let op = &scenario.operators[i];
    let sh = &scenario.shared;
    let delta_d = hardcore_distance(op.eps_d_dbm, sh.pt_d_dbm, &sh.pl_d2d);
    let q_d = retention(op.lambda_d, delta_d);
    let delta = hardcore_distance(sh.eps_dbm, sh.pt_d_dbm, &sh.pl_d2d);
    let q = retention(sh.lambda, delta);
    let (load, alpha) = cellular_mode_load(op, sh, q_d, q);
    OperatorModes {
        intra: ModeSelectionOutcome {
            delta: delta_d,
            q: q_d,
            cellular_mode_density: load,
            alpha,
        },
        shared: ModeSelectionOutcome {
            delta,
            q,
            cellular_mode_density: load,
            alpha,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::REFERENCE_BS_DENSITY;
    use proptest::prelude::*;

    #[test]
    fn hardcore_distance_examples() {
        let m = PathlossModel::d2d_reference();
        assert!((hardcore_distance(-72.0, 20.0, &m) - 39.810717055349734).abs() < 1e-9);
        assert!((hardcore_distance(-75.0, 20.0, &m) - 10f64.powf(67.0 / 40.0)).abs() < 1e-9);
        assert!((hardcore_distance(20.0 - 28.0, 20.0, &m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn retention_examples() {
        assert_eq!(retention(1e-3, 0.0), 1.0);
        assert_eq!(retention(0.0, 50.0), 1.0);
        let lambda = 4.0 * REFERENCE_BS_DENSITY;
        let delta = 39.810717055349734;
        let x = lambda * PI * delta * delta;
        assert!((x - 0.158489).abs() < 1e-6);
        // (1 - e^{-x})/x evaluated independently
        let q = retention(lambda, delta);
        assert!((q - 0.924_781_061_947_455_7).abs() < 1e-12);
        assert!(retention(1.0, 1e4) < 1e-7);
    }

    #[test]
    fn load_examples() {
        let shared = SharedParams::default();
        let op = OperatorParams::default();
        let (load, alpha) = cellular_mode_load(&op, &shared, 1.0, 1.0);
        assert_eq!(load, op.lambda_b);
        assert_eq!(alpha, 1.0);
        let half = OperatorParams {
            lambda_c: 0.5 * op.lambda_b,
            ..op
        };
        let (_, alpha) = cellular_mode_load(&half, &shared, 1.0, 1.0);
        assert!((alpha - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reference_modes_fix_alpha_before_the_game() {
        let s = Scenario::reference();
        let m = select_modes(&s, 0);
        assert!((m.intra.q - 0.972_530_832_005_746_6).abs() < 1e-12);
        assert!((m.shared.q - 0.924_781_061_947_455_7).abs() < 1e-12);
        // λ_c = λ_b already saturates the BS
        assert_eq!(m.shared.alpha, 1.0);
        let lb = s.operators[0].lambda_b;
        let want = lb + (1.0 - m.intra.q) * lb + (1.0 - m.shared.q) * 2.0 * lb;
        assert!((m.intra.cellular_mode_density - want).abs() < 1e-18);
    }

    #[test]
    fn ratio_examples() {
        let lb = REFERENCE_BS_DENSITY;
        assert!((multiop_ratio(4.0 * lb, lb).unwrap() - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(multiop_ratio(0.0, lb).unwrap(), 0.0);
        assert_eq!(multiop_ratio(lb, 0.0).unwrap(), 1.0);
        assert_eq!(multiop_ratio(0.0, 0.0), Err(ModeSelectionError::BothZero));
    }

    proptest! {
        #[test]
        fn retention_in_unit_interval_and_decreasing(
            lambda in 1e-7f64..1e-2, delta in 0.1f64..500.0, bump in 1.001f64..3.0
        ) {
            let q = retention(lambda, delta);
            prop_assert!(q > 0.0 && q <= 1.0);
            prop_assert!(retention(lambda, delta * bump) < q);
            prop_assert!(retention(lambda * bump, delta) < q);
        }

        #[test]
        fn retention_monotone_in_x(x1 in 0.0f64..50.0, dx in 1e-6f64..10.0) {
            // q depends on λ and δ only through λπδ²
            let q = |x: f64| retention(x / PI, 1.0);
            prop_assert!(q(x1 + dx) <= q(x1));
        }

        #[test]
        fn ratio_in_unit_interval(lambda in 0.0f64..1e-3, lambda_d in 0.0f64..1e-3) {
            prop_assume!(lambda + lambda_d > 0.0);
            let w = multiop_ratio(lambda, lambda_d).unwrap();
            prop_assert!((0.0..=1.0).contains(&w));
        }

        #[test]
        fn alpha_non_increasing_in_retention(
            q_d in 0.0f64..1.0, q in 0.0f64..1.0, dq in 0.0f64..0.5, lc in 0.0f64..2.0
        ) {
            let shared = SharedParams::default();
            let op = OperatorParams { lambda_c: lc * REFERENCE_BS_DENSITY, ..OperatorParams::default() };
            let (_, a0) = cellular_mode_load(&op, &shared, q_d, q);
            let (_, a1) = cellular_mode_load(&op, &shared, (q_d + dq).min(1.0), q);
            let (_, a2) = cellular_mode_load(&op, &shared, q_d, (q + dq).min(1.0));
            prop_assert!(a1 <= a0 && a2 <= a0);
        }
    }
}
