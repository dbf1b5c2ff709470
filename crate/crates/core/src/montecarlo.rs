//! Simulation oracle for shared-band D2D coverage and for the retention
//! fraction of interference-based mode selection.
//!
//! Trial `k` draws from its own ChaCha stream `(seed, k)`, and trials are
//! reduced through integer counts, so results do not depend on the number
//! of workers.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::mode_selection::{hardcore_distance, retention};
use crate::model::{db_to_linear, PathlossModel, Scenario, SharedParams};

/// Distance from the window edge inside which points are only used as
/// interferers, never as probes.
pub const GUARD_M: f64 = 500.0;

/// Smallest accepted number of coverage trials.
pub const MIN_TRIALS: usize = 1000;

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error(
        "window half-width {half_window} m is smaller than the interference radius {radius} m"
    )]
    WindowTooSmall { radius: f64, half_window: f64 },
    #[error("at least {MIN_TRIALS} trials are needed, got {0}")]
    TooFewTrials(usize),
    #[error("invalid Monte-Carlo input: {0}")]
    InvalidInput(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSettings {
    pub trials: usize,
    /// Side of the square simulation window in meters.
    pub window_m: f64,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            trials: 10_000,
            window_m: 2000.0,
            seed: 1,
        }
    }
}

/// Random generator for trial `trial` of the run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Homogeneous PPP of density `lambda` on the square of side `window`
/// centered at the origin.
pub fn sample_ppp<R: Rng + ?Sized>(lambda: f64, window: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let mean = lambda * window * window;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let n = Poisson::new(mean).expect("positive mean").sample(rng) as usize;
    let half = window / 2.0;
    (0..n)
        .map(|_| [rng.random_range(-half..half), rng.random_range(-half..half)])
        .collect()
}

/// Sequential thinning: points are visited in `order`, and a point is kept
/// when the power it receives from the points already kept stays below
/// `eps_mw`. Returns the keep mask indexed like `points`.
fn select_in_order(
    points: &[[f64; 2]],
    order: &[usize],
    eps_mw: f64,
    pt_mw: f64,
    model: &PathlossModel,
) -> Vec<bool> {
    let mut kept = vec![false; points.len()];
    let mut kept_list: Vec<usize> = Vec::with_capacity(points.len());
    let a = model.exponent();
    // P_t l(r) = P_t 10^{-b/10} r^{-a}
    let scale = pt_mw * db_to_linear(-model.intercept_db);
    for &i in order {
        let [x, y] = points[i];
        let mut power = 0.0;
        let mut ok = true;
        for &j in &kept_list {
            let [u, v] = points[j];
            let r2 = (x - u) * (x - u) + (y - v) * (y - v);
            power += scale * r2.powf(-0.5 * a);
            if !(power < eps_mw) {
                ok = false;
                break;
            }
        }
        if ok {
            kept[i] = true;
            kept_list.push(i);
        }
    }
    kept
}

/// Interference-based mode selection in uniformly random mark order.
pub fn interference_mode_select<R: Rng + ?Sized>(
    points: &[[f64; 2]],
    eps_dbm: f64,
    pt_dbm: f64,
    model: &PathlossModel,
    rng: &mut R,
) -> Vec<[f64; 2]> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(rng);
    let kept = select_in_order(
        points,
        &order,
        db_to_linear(eps_dbm),
        db_to_linear(pt_dbm),
        model,
    );
    points
        .iter()
        .zip(kept)
        .filter_map(|(p, k)| k.then_some(*p))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageEstimate {
    pub gamma: f64,
    pub coverage: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Normal-approximation 95% interval of a binomial proportion.
pub fn proportion_ci(successes: u64, trials: u64) -> (f64, f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let half = Z95 * (p * (1.0 - p) / n).sqrt();
    (p, (p - half).max(0.0), (p + half).min(1.0))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, McError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| McError::Pool(e.to_string()))
}

fn check_window(window: f64, delta: f64) -> Result<(), McError> {
    if !(window > 0.0) {
        return Err(McError::InvalidInput(format!(
            "window must be positive, got {window}"
        )));
    }
    let radius = GUARD_M + 2.0 * delta;
    if radius > window / 2.0 {
        return Err(McError::WindowTooSmall {
            radius,
            half_window: window / 2.0,
        });
    }
    Ok(())
}

/// SINR at the receiver of a typical retained multi-operator pair.
fn coverage_trial(
    shared: &SharedParams,
    beta_total: f64,
    window: f64,
    eps_mw: f64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let pt = shared.pt_d_mw();
    let model = &shared.pl_d2d;
    // condition on the probe at the origin surviving mode selection
    let (points, kept) = loop {
        let mut points = vec![[0.0, 0.0]];
        points.extend(sample_ppp(shared.lambda, window, rng));
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.shuffle(rng);
        let kept = select_in_order(&points, &order, eps_mw, pt, model);
        if kept[0] {
            break (points, kept);
        }
    };
    let theta = rng.random_range(0.0..2.0 * PI);
    let rx = [shared.d * theta.cos(), shared.d * theta.sin()];
    let gain_at = |p: &[f64; 2]| {
        let r = ((p[0] - rx[0]).powi(2) + (p[1] - rx[1]).powi(2)).sqrt();
        model.gain(r).unwrap_or(f64::INFINITY)
    };
    let h: f64 = Exp1.sample(rng);
    let signal = h * pt * gain_at(&points[0]);
    let mut interference = 0.0;
    for (p, _) in points.iter().zip(&kept).skip(1).filter(|(_, k)| **k) {
        let g: f64 = Exp1.sample(rng);
        interference += g * pt * gain_at(p);
    }
    signal / (beta_total * shared.noise_mw() + interference)
}

/// Empirical coverage of the shared band at each threshold in `gammas`.
pub fn estimate_coverage(
    scenario: &Scenario,
    beta_total: f64,
    gammas: &[f64],
    settings: &McSettings,
    workers: usize,
) -> Result<Vec<CoverageEstimate>, McError> {
    if settings.trials < MIN_TRIALS {
        return Err(McError::TooFewTrials(settings.trials));
    }
    let sh = &scenario.shared;
    if !(beta_total >= 0.0) || !(sh.lambda >= 0.0) || !(sh.d > 0.0) {
        return Err(McError::InvalidInput(format!(
            "beta_total={beta_total}, lambda={}, d={}",
            sh.lambda, sh.d
        )));
    }
    let delta = hardcore_distance(sh.eps_dbm, sh.pt_d_dbm, &sh.pl_d2d);
    check_window(settings.window_m, delta)?;
    let eps_mw = db_to_linear(sh.eps_dbm);
    let counts = pool(workers)?.install(|| {
        (0..settings.trials as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = trial_rng(settings.seed, k);
                let sinr = coverage_trial(sh, beta_total, settings.window_m, eps_mw, &mut rng);
                gammas
                    .iter()
                    .map(|&g| u64::from(sinr > g))
                    .collect::<Vec<_>>()
            })
            .reduce(
                || vec![0; gammas.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    });
    Ok(gammas
        .iter()
        .zip(counts)
        .map(|(&gamma, c)| {
            let (coverage, ci_lo, ci_hi) = proportion_ci(c, settings.trials as u64);
            CoverageEstimate {
                gamma,
                coverage,
                ci_lo,
                ci_hi,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RetentionEstimate {
    pub retained: u64,
    pub total: u64,
    pub fraction: f64,
    /// Closed-form retention at the same density and threshold.
    pub analytic: f64,
}

/// Fraction of points kept by interference-based selection, counted away
/// from the window edge, over `windows` independent windows.
pub fn estimate_retention(
    lambda: f64,
    eps_dbm: f64,
    shared: &SharedParams,
    windows: usize,
    settings: &McSettings,
    workers: usize,
) -> Result<RetentionEstimate, McError> {
    let delta = hardcore_distance(eps_dbm, shared.pt_d_dbm, &shared.pl_d2d);
    check_window(settings.window_m, delta)?;
    let inner = settings.window_m / 2.0 - GUARD_M;
    let eps_mw = db_to_linear(eps_dbm);
    let pt = shared.pt_d_mw();
    let (retained, total) = pool(workers)?.install(|| {
        (0..windows as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = trial_rng(settings.seed, k);
                let points = sample_ppp(lambda, settings.window_m, &mut rng);
                let mut order: Vec<usize> = (0..points.len()).collect();
                order.shuffle(&mut rng);
                let kept = select_in_order(&points, &order, eps_mw, pt, &shared.pl_d2d);
                points
                    .iter()
                    .zip(kept)
                    .filter(|(p, _)| p[0].abs() <= inner && p[1].abs() <= inner)
                    .fold((0u64, 0u64), |(r, t), (_, k)| (r + u64::from(k), t + 1))
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    });
    Ok(RetentionEstimate {
        retained,
        total,
        fraction: if total == 0 {
            1.0
        } else {
            retained as f64 / total as f64
        },
        analytic: retention(lambda, delta),
    })
}
