//! Coverage probabilities, spectral efficiencies, rates and utility.
//!
//! The D2D coverage in a band is
//!
//! ```text
//! P(γ) = exp(-γβ/η - C(γ)),   η = P_t l(d) / σ²
//! C(γ) = qλ A(γ; 2δ, ∞) + c qλ A(γ; δ, 2δ),   c = 2π / (4π/3 + √3/2)
//! ```
//!
//! where `A` is the annulus integral of `f r/(1+f)`. `C` does not depend on
//! the bandwidth, so a band's spectral efficiency as a function of its
//! bandwidth is evaluated on a frozen node set with `C` precomputed there
//! ([`BandRateCurve`]). The curves are cached per parameter tuple.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use parking_lot::RwLock;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::mode_selection::{multiop_ratio, select_modes, ModeSelectionError, OperatorModes};
use crate::model::{OperatorParams, RateReport, Scenario, SharedParams, SpectrumPartition};
use crate::numerics::{
    annulus_integral, build_semi_infinite_rule, exp_e1, hyp2f1_neg, try_integrate_semi_infinite,
    NumericsError, RuleNode, Tolerance,
};

/// Weight of the `[δ, 2δ]` ring relative to the far field.
pub fn hardcore_ring_factor() -> f64 {
    2.0 * PI / (4.0 * PI / 3.0 + 3f64.sqrt() / 2.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverageError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    ModeSelection(#[from] ModeSelectionError),
}

/// Tolerance of the radial integral inside `C(γ)`.
fn annulus_tol() -> Tolerance {
    Tolerance::new(1e-9, 1e-10)
}

/// Tolerance used for spectral-efficiency integrals.
pub fn efficiency_tol() -> Tolerance {
    Tolerance::new(1e-10, 1e-9)
}

/// Interferers seen in one band: D2D-mode fraction, transmitter density
/// and hardcore distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterferenceField {
    pub q: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl InterferenceField {
    fn active_density(&self) -> f64 {
        self.q * self.lambda
    }
}

/// `C(γ)`, the interference part of the coverage exponent.
pub fn interference_exponent(
    gamma: f64,
    field: &InterferenceField,
    shared: &SharedParams,
) -> Result<f64, NumericsError> {
    let dens = field.active_density();
    if dens == 0.0 || gamma == 0.0 {
        return Ok(0.0);
    }
    let m = &shared.pl_d2d;
    let far = annulus_integral(
        gamma,
        shared.d,
        2.0 * field.delta,
        f64::INFINITY,
        m,
        annulus_tol(),
    )?;
    let ring = annulus_integral(
        gamma,
        shared.d,
        field.delta,
        2.0 * field.delta,
        m,
        annulus_tol(),
    )?;
    Ok(dens * far + hardcore_ring_factor() * dens * ring)
}

/// Coverage probability of a D2D link in a band of normalized width
/// `beta_total`, with `q`, `lambda`, `delta` describing the interferers.
/// Serves the shared band directly and the intra-operator band with its own
/// `q_d`, `λ_d`, `δ_d` and `β_d`.
pub fn d2d_coverage(
    gamma: f64,
    beta_total: f64,
    q: f64,
    lambda: f64,
    delta: f64,
    shared: &SharedParams,
) -> Result<f64, NumericsError> {
    if !(gamma >= 0.0) || !(0.0..=2.0).contains(&beta_total) || !(0.0..=1.0).contains(&q) {
        return Err(NumericsError::Domain(format!(
            "d2d_coverage: gamma={gamma}, beta_total={beta_total}, q={q}"
        )));
    }
    if gamma == 0.0 {
        return Ok(1.0);
    }
    let field = InterferenceField { q, lambda, delta };
    let noise = gamma * beta_total / shared.snr_full_band();
    Ok((-noise - interference_exponent(gamma, &field, shared)?).exp())
}

/// Uplink coverage `1 / (1 + α (2γ/(a-2)) ₂F₁(1, (a-2)/a; 2-2/a; -γ))`.
pub fn cellular_coverage(gamma: f64, alpha: f64, a: f64) -> Result<f64, NumericsError> {
    if !(a > 2.0) {
        return Err(NumericsError::Domain(format!(
            "pathloss exponent must exceed 2, got {a}"
        )));
    }
    if !(gamma >= 0.0) || !(0.0..=1.0).contains(&alpha) {
        return Err(NumericsError::Domain(format!(
            "cellular_coverage: gamma={gamma}, alpha={alpha}"
        )));
    }
    if gamma == 0.0 || alpha == 0.0 {
        return Ok(1.0);
    }
    let b = (a - 2.0) / a;
    let f = hyp2f1_neg(1.0, b, 2.0 - 2.0 / a, -gamma)?;
    Ok(1.0 / (1.0 + alpha * 2.0 * gamma / (a - 2.0) * f))
}

/// A coverage law `γ ↦ P(SINR > γ)`.
pub trait CoverageFunction {
    fn coverage(&self, gamma: f64) -> Result<f64, NumericsError>;
}

impl<F> CoverageFunction for F
where
    F: Fn(f64) -> Result<f64, NumericsError>,
{
    fn coverage(&self, gamma: f64) -> Result<f64, NumericsError> {
        self(gamma)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CellularCoverage {
    pub alpha: f64,
    pub exponent: f64,
}

impl CoverageFunction for CellularCoverage {
    fn coverage(&self, gamma: f64) -> Result<f64, NumericsError> {
        cellular_coverage(gamma, self.alpha, self.exponent)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct D2dCoverage<'a> {
    pub field: InterferenceField,
    pub beta_total: f64,
    pub shared: &'a SharedParams,
}

impl CoverageFunction for D2dCoverage<'_> {
    fn coverage(&self, gamma: f64) -> Result<f64, NumericsError> {
        d2d_coverage(
            gamma,
            self.beta_total,
            self.field.q,
            self.field.lambda,
            self.field.delta,
            self.shared,
        )
    }
}

/// `scale · ∫₀^∞ P(γ)/(1+γ) dγ`.
pub fn spectral_efficiency<P: CoverageFunction + ?Sized>(
    p: &P,
    scale: f64,
) -> Result<f64, NumericsError> {
    let est = try_integrate_semi_infinite(
        |g| Ok::<_, NumericsError>(p.coverage(g)? / (1.0 + g)),
        efficiency_tol(),
    )?;
    Ok(scale * est.value)
}

/// Spectral efficiency of one D2D band as a function of its bandwidth.
#[derive(Debug, Clone)]
pub struct BandRateCurve {
    field: InterferenceField,
    eta: f64,
    nodes: Vec<RuleNode<f64>>,
}

/// Bandwidths at which the frozen rule is required to meet tolerance.
const PROBE_BANDWIDTHS: [f64; 4] = [0.0, 0.25, 1.0, 2.0];

impl BandRateCurve {
    pub fn build(field: InterferenceField, shared: &SharedParams) -> Result<Self, NumericsError> {
        let eta = shared.snr_full_band();
        if field.active_density() == 0.0 {
            return Ok(Self {
                field,
                eta,
                nodes: Vec::new(),
            });
        }
        let nodes = build_semi_infinite_rule(
            |gammas: &[f64]| {
                gammas
                    .par_iter()
                    .map(|&g| interference_exponent(g, &field, shared))
                    .collect::<Result<Vec<_>, _>>()
            },
            |g, c, out: &mut [f64]| {
                for (o, b) in out.iter_mut().zip(PROBE_BANDWIDTHS) {
                    *o = (-g * b / eta - c).exp() / (1.0 + g);
                }
            },
            PROBE_BANDWIDTHS.len(),
            efficiency_tol(),
        )?;
        Ok(Self { field, eta, nodes })
    }

    pub fn field(&self) -> &InterferenceField {
        &self.field
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Spectral efficiency `R(β)`. Infinite at `β = 0` without interferers.
    pub fn efficiency(&self, beta: f64) -> f64 {
        if self.nodes.is_empty() {
            if beta <= 0.0 {
                return f64::INFINITY;
            }
            return exp_e1(beta / self.eta);
        }
        let s = beta / self.eta;
        pairwise_sum(
            &self
                .nodes
                .iter()
                .map(|n| n.weight * (-n.gamma * s - n.aux).exp() / (1.0 + n.gamma))
                .collect::<Vec<_>>(),
        )
    }

    /// `β R(β)`, continuous at `β = 0`.
    pub fn band_rate(&self, beta: f64) -> f64 {
        if beta <= 0.0 {
            0.0
        } else {
            beta * self.efficiency(beta)
        }
    }
}

/// Order-fixed pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct BandKey([u64; 7]);

impl BandKey {
    fn new(field: &InterferenceField, shared: &SharedParams) -> Self {
        Self([
            field.q.to_bits(),
            field.lambda.to_bits(),
            field.delta.to_bits(),
            shared.d.to_bits(),
            shared.snr_full_band().to_bits(),
            shared.pl_d2d.slope_db_per_decade.to_bits(),
            shared.pl_d2d.intercept_db.to_bits(),
        ])
    }
}

/// Cache of band curves and cellular efficiencies. Safe to share across
/// threads; a value computed twice under contention is identical both times.
#[derive(Debug, Default)]
pub struct RateCache {
    bands: RwLock<HashMap<BandKey, Arc<BandRateCurve>>>,
    cellular: RwLock<HashMap<[u64; 2], f64>>,
}

impl RateCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn band(
        &self,
        field: InterferenceField,
        shared: &SharedParams,
    ) -> Result<Arc<BandRateCurve>, NumericsError> {
        let key = BandKey::new(&field, shared);
        if let Some(c) = self.bands.read().get(&key) {
            return Ok(c.clone());
        }
        let curve = Arc::new(BandRateCurve::build(field, shared)?);
        Ok(self.bands.write().entry(key).or_insert(curve).clone())
    }

    /// `∫ P_c/(1+γ)` without the activity scale.
    pub fn cellular_efficiency(&self, alpha: f64, exponent: f64) -> Result<f64, NumericsError> {
        let key = [alpha.to_bits(), exponent.to_bits()];
        if let Some(v) = self.cellular.read().get(&key) {
            return Ok(*v);
        }
        let v = spectral_efficiency(&CellularCoverage { alpha, exponent }, 1.0)?;
        self.cellular.write().insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.bands.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything needed to evaluate one operator's rates at any strategy
/// profile, with the expensive integrals already resolved.
#[derive(Debug, Clone)]
pub struct OperatorRates {
    pub modes: OperatorModes,
    /// `R_c`, including the activity portion ν.
    pub r_c: f64,
    pub w: f64,
    intra: Arc<BandRateCurve>,
    shared: Arc<BandRateCurve>,
}

impl OperatorRates {
    pub fn prepare(
        scenario: &Scenario,
        i: usize,
        cache: &RateCache,
    ) -> Result<Self, CoverageError> {
        let modes = select_modes(scenario, i);
        Self::with_modes(&scenario.operators[i], &scenario.shared, modes, cache)
    }

    pub fn with_modes(
        op: &OperatorParams,
        shared: &SharedParams,
        modes: OperatorModes,
        cache: &RateCache,
    ) -> Result<Self, CoverageError> {
        let a = shared.pl_cellular.exponent();
        let r_c = op.nu * cache.cellular_efficiency(modes.shared.alpha, a)?;
        let w = multiop_ratio(shared.lambda, op.lambda_d)?;
        let intra = cache.band(
            InterferenceField {
                q: modes.intra.q,
                lambda: op.lambda_d,
                delta: modes.intra.delta,
            },
            shared,
        )?;
        let shared_curve = cache.band(
            InterferenceField {
                q: modes.shared.q,
                lambda: shared.lambda,
                delta: modes.shared.delta,
            },
            shared,
        )?;
        Ok(Self {
            modes,
            r_c,
            w,
            intra,
            shared: shared_curve,
        })
    }

    pub fn q_d(&self) -> f64 {
        self.modes.intra.q
    }

    pub fn q(&self) -> f64 {
        self.modes.shared.q
    }

    pub fn intra_curve(&self) -> &BandRateCurve {
        &self.intra
    }

    pub fn shared_curve(&self) -> &BandRateCurve {
        &self.shared
    }

    /// Intra-operator D2D-mode rate `β_d R_d(β_d)`.
    pub fn intra_band_rate(&self, beta_d: f64) -> f64 {
        self.intra.band_rate(beta_d)
    }

    pub fn report(&self, partition: &SpectrumPartition, beta_opponent: f64) -> RateReport {
        let cell = partition.beta_c * self.r_c;
        let beta_total = partition.beta + beta_opponent;
        let q_d = cell * (1.0 - self.q_d()) + self.intra.band_rate(partition.beta_d) * self.q_d();
        let q_s = cell * (1.0 - self.q()) + self.shared.band_rate(beta_total) * self.q();
        RateReport {
            r_c: self.r_c,
            r_d: self.intra.efficiency(partition.beta_d),
            r_shared: self.shared.efficiency(beta_total),
            q_c: cell,
            q_d,
            q_s,
            u: (1.0 - self.w) * q_d + self.w * q_s,
            w: self.w,
        }
    }
}

/// Rates and utility of one operator at one strategy profile.
pub fn evaluate_rates(
    op: &OperatorParams,
    shared: &SharedParams,
    partition: &SpectrumPartition,
    beta_opponent: f64,
    modes: &OperatorModes,
    cache: &RateCache,
) -> Result<RateReport, CoverageError> {
    if !(0.0..=1.0).contains(&beta_opponent) {
        return Err(NumericsError::Domain(format!("beta_opponent = {beta_opponent}")).into());
    }
    let rates = OperatorRates::with_modes(op, shared, *modes, cache)?;
    Ok(rates.report(partition, beta_opponent))
}
