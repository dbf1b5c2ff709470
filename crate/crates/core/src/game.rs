//! The two-operator spectrum-sharing game.
//!
//! Each operator picks the fraction `β_i` it contributes to the shared band.
//! The cellular target fixes `β_c = τ/R_c`, the intra-operator D2D floor
//! bounds `β_i` from above, and the best response maximizes the operator's
//! concave utility on `[0, u_i]`. Operators alternate best responses until
//! the profile stops moving.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coverage::{CoverageError, OperatorRates, RateCache};
use crate::model::{GameState, RateReport, Scenario, SpectrumPartition, TraceEntry};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error("operator {operator}: cellular target needs beta_c = {beta_c} > 1")]
    CellularInfeasible { operator: usize, beta_c: f64 },
    #[error("operator {operator}: intra-operator D2D rate {best} cannot reach floor {floor}")]
    IntraD2DInfeasible {
        operator: usize,
        best: f64,
        floor: f64,
    },
    #[error("best responses did not settle after {iterations} iterations (last profile {last:?})")]
    NoConvergence { iterations: usize, last: (f64, f64) },
    #[error(
        "{property} violated for operator {operator} at (beta_i={beta_i}, beta_j={beta_j}): {value}"
    )]
    PropertyViolated {
        property: &'static str,
        operator: usize,
        beta_i: f64,
        beta_j: f64,
        value: f64,
    },
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Interval width at which the golden-section search stops.
    pub br_tol: f64,
    /// Largest per-iteration strategy change accepted as converged.
    pub ne_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            br_tol: 1e-6,
            ne_tol: 1e-5,
            max_iter: 100,
        }
    }
}

/// Utility differences below this are treated as ties.
pub const FLAT_TOLERANCE: f64 = 1e-9;

/// Strategy bounds of one operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibleRegion {
    pub beta_c: f64,
    pub beta_d_min: f64,
    /// Largest admissible contribution `u = 1 - β_c - β_d,min`.
    pub upper: f64,
}

/// Cellular share from the rate target and the smallest intra-operator D2D
/// share meeting its floor.
pub fn feasible_region(
    operator: usize,
    tau: f64,
    mu_d: f64,
    rates: &OperatorRates,
) -> Result<FeasibleRegion, GameError> {
    let beta_c = tau / rates.r_c;
    if !(beta_c <= 1.0) {
        return Err(GameError::CellularInfeasible { operator, beta_c });
    }
    let room = 1.0 - beta_c;
    let g = |x: f64| rates.intra_band_rate(x);
    let beta_d_min = if mu_d <= 0.0 {
        0.0
    } else {
        let best = g(room);
        if best < mu_d {
            return Err(GameError::IntraD2DInfeasible {
                operator,
                best,
                floor: mu_d,
            });
        }
        // g(0) = 0 and g is concave, so {g >= μ} is an interval starting here
        let (mut lo, mut hi) = (0.0, room);
        while hi - lo > 1e-14 * room.max(1e-300) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) >= mu_d {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(FeasibleRegion {
        beta_c,
        beta_d_min,
        upper: (room - beta_d_min).max(0.0),
    })
}

/// Maximizer of a concave `f` on `[lo, hi]` by golden-section search.
///
/// When `f` is flat at its maximum (within [`FLAT_TOLERANCE`]) the smallest
/// maximizer is returned.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let candidates = [(lo, f(lo)), (mid, f(mid)), (hi, f(hi))];
    let (x_best, f_best) =
        candidates.iter().copied().fold(
            (lo, f64::NEG_INFINITY),
            |acc, c| if c.1 > acc.1 { c } else { acc },
        );
    let threshold = f_best - FLAT_TOLERANCE;
    if candidates[0].1 >= threshold {
        return lo;
    }
    // the superlevel set of a concave function is an interval; find its
    // left end
    let (mut l, mut r) = (lo, x_best);
    while r - l > tol.min(1e-9).max(f64::EPSILON * hi.abs()) {
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            break;
        }
        if f(m) >= threshold {
            r = m;
        } else {
            l = m;
        }
    }
    r
}

/// One operator with its rates resolved and its strategy bounds fixed.
#[derive(Debug, Clone)]
pub struct Player {
    pub index: usize,
    pub rates: OperatorRates,
    pub region: FeasibleRegion,
}

impl Player {
    pub fn new(scenario: &Scenario, index: usize, cache: &RateCache) -> Result<Self, GameError> {
        let rates = OperatorRates::prepare(scenario, index, cache)?;
        let op = &scenario.operators[index];
        let region = feasible_region(index, op.tau, op.mu_d, &rates)?;
        Ok(Self {
            index,
            rates,
            region,
        })
    }

    fn partition(&self, beta_i: f64) -> SpectrumPartition {
        let beta_c = self.region.beta_c;
        SpectrumPartition {
            beta_c,
            beta_d: (1.0 - beta_c - beta_i).max(0.0),
            beta: beta_i,
        }
    }

    pub fn report(&self, beta_i: f64, beta_j: f64) -> RateReport {
        self.rates.report(&self.partition(beta_i), beta_j)
    }

    pub fn utility(&self, beta_i: f64, beta_j: f64) -> f64 {
        self.report(beta_i, beta_j).u
    }

    /// Utility without spectrum sharing: nothing contributed and every
    /// multi-operator transmission routed through the BSs.
    pub fn baseline_utility(&self) -> f64 {
        let cell = self.region.beta_c * self.rates.r_c;
        let q_d = self.rates.q_d();
        let intra = cell * (1.0 - q_d) + self.rates.intra_band_rate(1.0 - self.region.beta_c) * q_d;
        (1.0 - self.rates.w) * intra + self.rates.w * cell
    }

    pub fn best_response(&self, beta_j: f64, tol: f64) -> f64 {
        golden_section_max(|b| self.utility(b, beta_j), 0.0, self.region.upper, tol)
    }
}

/// A fully prepared game: both players plus solver settings.
#[derive(Debug, Clone)]
pub struct Game {
    pub players: [Player; 2],
    pub settings: SolverSettings,
}

impl Game {
    pub fn new(scenario: &Scenario, settings: SolverSettings) -> Result<Self, GameError> {
        Self::with_cache(scenario, settings, &RateCache::new())
    }

    pub fn with_cache(
        scenario: &Scenario,
        settings: SolverSettings,
        cache: &RateCache,
    ) -> Result<Self, GameError> {
        Ok(Self {
            players: [
                Player::new(scenario, 0, cache)?,
                Player::new(scenario, 1, cache)?,
            ],
            settings,
        })
    }

    pub fn utilities(&self, profile: (f64, f64)) -> (f64, f64) {
        (
            self.players[0].utility(profile.0, profile.1),
            self.players[1].utility(profile.1, profile.0),
        )
    }

    fn entry(&self, iteration: usize, profile: (f64, f64)) -> TraceEntry {
        let (u_1, u_2) = self.utilities(profile);
        TraceEntry {
            iteration,
            beta_1: profile.0,
            beta_2: profile.1,
            u_1,
            u_2,
        }
    }

    /// Best-response iteration with operator 1 moving first.
    pub fn find_equilibrium(&self, initial: (f64, f64)) -> Result<GameState, GameError> {
        self.find_equilibrium_ordered(initial, 0)
    }

    /// Best-response iteration with `first` (0 or 1) moving first.
    pub fn find_equilibrium_ordered(
        &self,
        initial: (f64, f64),
        first: usize,
    ) -> Result<GameState, GameError> {
        let s = &self.settings;
        let mut b = [
            initial.0.clamp(0.0, self.players[0].region.upper),
            initial.1.clamp(0.0, self.players[1].region.upper),
        ];
        let mut trace = vec![self.entry(0, (b[0], b[1]))];
        let order = if first == 0 { [0, 1] } else { [1, 0] };
        for k in 1..=s.max_iter {
            let prev = b;
            for &i in &order {
                b[i] = self.players[i].best_response(b[1 - i], s.br_tol);
            }
            trace.push(self.entry(k, (b[0], b[1])));
            let step = (b[0] - prev[0]).abs().max((b[1] - prev[1]).abs());
            if step < s.ne_tol {
                let ne = (b[0], b[1]);
                let utilities = self.utilities(ne);
                let baseline = (
                    self.players[0].baseline_utility(),
                    self.players[1].baseline_utility(),
                );
                return Ok(GameState {
                    trace,
                    converged: true,
                    ne,
                    utilities,
                    baseline,
                    agreement: utilities.0 >= baseline.0 && utilities.1 >= baseline.1,
                });
            }
        }
        Err(GameError::NoConvergence {
            iterations: s.max_iter,
            last: (b[0], b[1]),
        })
    }

    /// Finite-difference checks of the utility's curvature on an `n × n`
    /// interior grid of each operator's strategy box.
    pub fn verify_properties(&self, n: usize, step: f64) -> DiagnosticsReport {
        let mut rows = Vec::with_capacity(2 * n * n);
        for (i, player) in self.players.iter().enumerate() {
            let other = &self.players[1 - i];
            let u = |bi: f64, bj: f64| player.utility(bi, bj);
            let g = |bd: f64| player.rates.intra_band_rate(bd);
            let coupled = player.rates.w > 0.0 && player.rates.q() > 0.0;
            for a in 1..=n {
                for c in 1..=n {
                    let bi = player.region.upper * a as f64 / (n + 1) as f64;
                    let bj = other.region.upper * c as f64 / (n + 1) as f64;
                    let h = step;
                    let f0 = u(bi, bj);
                    let own = (u(bi + h, bj) - 2.0 * f0 + u(bi - h, bj)) / (h * h);
                    let cross = (u(bi + h, bj + h) - u(bi + h, bj - h) - u(bi - h, bj + h)
                        + u(bi - h, bj - h))
                        / (4.0 * h * h);
                    let bd = 1.0 - player.region.beta_c - bi;
                    let constraint = (g(bd + h) - 2.0 * g(bd) + g(bd - h)) / (h * h);
                    rows.push(DiagnosticRow {
                        operator: i + 1,
                        beta_i: bi,
                        beta_j: bj,
                        own,
                        cross,
                        constraint,
                        concave: own < 0.0,
                        submodular: if coupled { Some(cross < 0.0) } else { None },
                        dominant: if coupled {
                            Some(own.abs() > cross.abs())
                        } else {
                            None
                        },
                        constraint_concave: constraint < 0.0,
                    });
                }
            }
        }
        DiagnosticsReport { rows }
    }
}

pub fn find_equilibrium(
    scenario: &Scenario,
    initial: (f64, f64),
    settings: SolverSettings,
) -> Result<GameState, GameError> {
    Game::new(scenario, settings)?.find_equilibrium(initial)
}

/// Relative utility gain of each operator at the NE over no sharing.
pub fn sharing_gain(state: &GameState) -> (f64, f64) {
    (
        (state.utilities.0 - state.baseline.0) / state.baseline.0,
        (state.utilities.1 - state.baseline.1) / state.baseline.1,
    )
}

/// `true` when, after the first iteration, one operator's contributions
/// never rise and the other's never fall (up to `slack`).
pub fn trace_is_monotone(trace: &[TraceEntry], slack: f64) -> bool {
    let tail = if trace.len() > 1 { &trace[1..] } else { trace };
    let dir = |f: fn(&TraceEntry) -> f64| {
        let up = tail.windows(2).all(|w| f(&w[1]) >= f(&w[0]) - slack);
        let down = tail.windows(2).all(|w| f(&w[1]) <= f(&w[0]) + slack);
        (up, down)
    };
    let (up1, down1) = dir(|e| e.beta_1);
    let (up2, down2) = dir(|e| e.beta_2);
    (up1 && down2) || (down1 && up2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub operator: usize,
    pub beta_i: f64,
    pub beta_j: f64,
    /// ∂²U_i/∂β_i²
    pub own: f64,
    /// ∂²U_i/∂β_i∂β_j
    pub cross: f64,
    /// ∂²(β_d R_d)/∂β_i²
    pub constraint: f64,
    pub concave: bool,
    /// `None` when the operator carries no multi-operator traffic and the
    /// coupling term vanishes.
    pub submodular: Option<bool>,
    pub dominant: Option<bool>,
    pub constraint_concave: bool,
}

impl DiagnosticRow {
    fn first_violation(&self) -> Option<(&'static str, f64)> {
        if !self.concave {
            return Some(("concavity", self.own));
        }
        if self.submodular == Some(false) {
            return Some(("sub-modularity", self.cross));
        }
        if self.dominant == Some(false) {
            return Some(("diagonal dominance", self.own.abs() - self.cross.abs()));
        }
        if !self.constraint_concave {
            return Some(("constraint concavity", self.constraint));
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub rows: Vec<DiagnosticRow>,
}

impl DiagnosticsReport {
    pub fn violations(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.first_violation().is_some())
            .count()
    }

    pub fn check(&self) -> Result<(), GameError> {
        for r in &self.rows {
            if let Some((property, value)) = r.first_violation() {
                return Err(GameError::PropertyViolated {
                    property,
                    operator: r.operator,
                    beta_i: r.beta_i,
                    beta_j: r.beta_j,
                    value,
                });
            }
        }
        Ok(())
    }
}

pub fn verify_properties(
    scenario: &Scenario,
    grid: usize,
    settings: SolverSettings,
) -> Result<DiagnosticsReport, GameError> {
    let report = Game::new(scenario, settings)?.verify_properties(grid, 1e-4);
    report.check()?;
    Ok(report)
}
