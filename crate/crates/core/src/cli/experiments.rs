//! The experiments behind the CSV outputs. Sweep points run on a worker
//! pool and are written in sweep order.

use rayon::prelude::*;
use std::path::Path;
use std::str::FromStr;

use super::config::Config;
use super::table::{Cell, Table};
use super::CliError;
use crate::coverage::{d2d_coverage, RateCache};
use crate::game::{sharing_gain, Game};
use crate::mode_selection::select_modes;
use crate::model::{GameState, Scenario};
use crate::montecarlo::estimate_coverage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Convergence,
    BetaVsEps,
    GainVsEps,
    GainVsLoad,
    McValidate,
    Diagnostics,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Convergence,
        Experiment::BetaVsEps,
        Experiment::GainVsEps,
        Experiment::GainVsLoad,
        Experiment::McValidate,
        Experiment::Diagnostics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::BetaVsEps => "beta_vs_eps",
            Experiment::GainVsEps => "gain_vs_eps",
            Experiment::GainVsLoad => "gain_vs_load",
            Experiment::McValidate => "mc_validate",
            Experiment::Diagnostics => "diagnostics",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!(
                    "unknown experiment `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads for sweeps and trials; 0 picks the number of CPUs.
    pub workers: usize,
}

/// Mode-selection thresholds swept by the ε experiments, in dBm.
pub fn eps_grid() -> Vec<f64> {
    (-80..=-60).map(f64::from).collect()
}

/// Operator-2 intra-operator D2D densities in units of its BS density.
pub fn load_grid() -> Vec<f64> {
    (2..=16).map(|k| k as f64 / 10.0).collect()
}

/// Threshold used by the load sweep, in dBm.
pub const LOAD_SWEEP_EPS_DBM: f64 = -72.0;

/// SINR thresholds of the simulation comparison.
pub const MC_GAMMAS: [f64; 9] = [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0];

/// Shared-band bandwidth (fraction of one operator's band) used for the
/// simulation comparison.
pub const MC_BETA_TOTAL: f64 = 1.0;

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
}

fn solve(cfg: &Config, scenario: &Scenario, cache: &RateCache) -> Result<GameState, CliError> {
    Ok(Game::with_cache(scenario, cfg.solver, cache)?.find_equilibrium((0.0, 0.0))?)
}

fn sweep<T, F>(points: &[f64], workers: usize, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(f64) -> Result<T, CliError> + Sync,
{
    pool(workers)?.install(|| points.par_iter().map(|&x| f(x)).collect())
}

/// Computes the table of one experiment without touching the filesystem.
pub fn build_table(cfg: &Config, exp: Experiment, opts: RunOptions) -> Result<Table, CliError> {
    let base = cfg.scenario();
    let cache = RateCache::new();
    let mut table;
    match exp {
        Experiment::Convergence => {
            table = Table::new(&["iteration", "beta_1", "beta_2", "u_1", "u_2"]);
            let state = pool(opts.workers)?.install(|| solve(cfg, &base, &cache))?;
            for e in &state.trace {
                table.push(vec![
                    e.iteration.into(),
                    e.beta_1.into(),
                    e.beta_2.into(),
                    e.u_1.into(),
                    e.u_2.into(),
                ]);
            }
        }
        Experiment::BetaVsEps | Experiment::GainVsEps => {
            let grid = eps_grid();
            let states = sweep(&grid, opts.workers, |eps| {
                let mut s = base;
                s.shared.eps_dbm = eps;
                solve(cfg, &s, &cache)
            })?;
            if exp == Experiment::BetaVsEps {
                table = Table::new(&["eps", "beta_1_star", "beta_2_star"]);
                for (eps, st) in grid.iter().zip(&states) {
                    table.push(vec![(*eps).into(), st.ne.0.into(), st.ne.1.into()]);
                }
            } else {
                table = Table::new(&["eps", "gain_1", "gain_2"]);
                for (eps, st) in grid.iter().zip(&states) {
                    let g = sharing_gain(st);
                    table.push(vec![(*eps).into(), g.0.into(), g.1.into()]);
                }
            }
        }
        Experiment::GainVsLoad => {
            let grid = load_grid();
            let states = sweep(&grid, opts.workers, |ratio| {
                let mut s = base;
                s.shared.eps_dbm = LOAD_SWEEP_EPS_DBM;
                s.operators[1].lambda_d = ratio * s.operators[1].lambda_b;
                solve(cfg, &s, &cache)
            })?;
            table = Table::new(&["lambda2d", "gain_1", "gain_2", "beta_1_star", "beta_2_star"]);
            for (ratio, st) in grid.iter().zip(&states) {
                let g = sharing_gain(st);
                table.push(vec![
                    (*ratio).into(),
                    g.0.into(),
                    g.1.into(),
                    st.ne.0.into(),
                    st.ne.1.into(),
                ]);
            }
        }
        Experiment::McValidate => {
            table = Table::new(&["gamma", "analytic", "empirical", "ci_lo", "ci_hi"]);
            let modes = select_modes(&base, 0).shared;
            let est = estimate_coverage(&base, MC_BETA_TOTAL, &MC_GAMMAS, &cfg.mc, opts.workers)?;
            for e in est {
                let analytic = d2d_coverage(
                    e.gamma,
                    MC_BETA_TOTAL,
                    modes.q,
                    base.shared.lambda,
                    modes.delta,
                    &base.shared,
                )
                .map_err(|err| CliError::Game(crate::coverage::CoverageError::from(err).into()))?;
                table.push(vec![
                    e.gamma.into(),
                    analytic.into(),
                    e.coverage.into(),
                    e.ci_lo.into(),
                    e.ci_hi.into(),
                ]);
            }
        }
        Experiment::Diagnostics => {
            table = Table::new(&[
                "operator",
                "beta_i",
                "beta_j",
                "own",
                "cross",
                "constraint",
                "concave",
                "submodular",
                "dominant",
                "constraint_concave",
            ]);
            let report = pool(opts.workers)?
                .install(|| Game::with_cache(&base, cfg.solver, &cache))?
                .verify_properties(10, 1e-4);
            for r in &report.rows {
                table.push(vec![
                    r.operator.into(),
                    r.beta_i.into(),
                    r.beta_j.into(),
                    r.own.into(),
                    r.cross.into(),
                    r.constraint.into(),
                    r.concave.into(),
                    Cell::from(r.submodular),
                    Cell::from(r.dominant),
                    r.constraint_concave.into(),
                ]);
            }
        }
    }
    Ok(table)
}

/// Runs one experiment and writes its CSV to `out`. Nothing is written when
/// the run fails.
pub fn run_experiment(
    cfg: &Config,
    exp: Experiment,
    out: &Path,
    opts: RunOptions,
) -> Result<Table, CliError> {
    let table = build_table(cfg, exp, opts)?;
    table.write_atomic(out)?;
    Ok(table)
}
