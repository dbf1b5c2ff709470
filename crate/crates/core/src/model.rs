//! Scenario types for the two-operator overlay D2D model.
//!
//! All quantities are stored the way they are configured: densities in
//! m⁻², distances in meters, powers and thresholds in dBm. Accessors that
//! end in `_mw` return linear milliwatts; everything downstream of this
//! module works in linear units only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Base-station density used throughout the reference scenario: one BS per
/// disc of radius 200 m.
pub const REFERENCE_BS_DENSITY: f64 = 1.0 / (std::f64::consts::PI * 200.0 * 200.0);

/// Errors raised while validating a scenario. `field` is a JSON pointer
/// into the configuration document (e.g. `/operators/0/tau`).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid density at {field}: {value}")]
    InvalidDensity { field: String, value: f64 },
    #[error("invalid fraction at {field}: {value}")]
    InvalidFraction { field: String, value: f64 },
    #[error("pathloss at {field} too flat: slope {slope} dB/decade must exceed 20")]
    PathlossTooFlat { field: String, slope: f64 },
    #[error("invalid value at {field}: {value}")]
    InvalidValue { field: String, value: f64 },
}

impl ModelError {
    pub fn field(&self) -> &str {
        match self {
            ModelError::InvalidDensity { field, .. }
            | ModelError::InvalidFraction { field, .. }
            | ModelError::PathlossTooFlat { field, .. }
            | ModelError::InvalidValue { field, .. } => field,
        }
    }
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Log-distance attenuation `loss(r) = slope * log10(r) + intercept` in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathlossModel {
    #[serde(rename = "slope")]
    pub slope_db_per_decade: f64,
    #[serde(rename = "intercept")]
    pub intercept_db: f64,
}

impl PathlossModel {
    pub const fn new(slope_db_per_decade: f64, intercept_db: f64) -> Self {
        Self {
            slope_db_per_decade,
            intercept_db,
        }
    }

    /// 3GPP macro-cell law used for the cellular uplink.
    pub const fn cellular_reference() -> Self {
        Self::new(37.6, 15.3)
    }

    /// 3GPP D2D law.
    pub const fn d2d_reference() -> Self {
        Self::new(40.0, 28.0)
    }

    /// Equivalent power-law exponent.
    pub fn exponent(&self) -> f64 {
        self.slope_db_per_decade / 10.0
    }

    fn validate(&self, field: &str) -> Result<(), ModelError> {
        if !self.slope_db_per_decade.is_finite() || self.slope_db_per_decade <= 20.0 {
            return Err(ModelError::PathlossTooFlat {
                field: format!("{field}/slope"),
                slope: self.slope_db_per_decade,
            });
        }
        if !self.intercept_db.is_finite() {
            return Err(ModelError::InvalidValue {
                field: format!("{field}/intercept"),
                value: self.intercept_db,
            });
        }
        Ok(())
    }
}

/// Per-operator configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorParams {
    /// BS density.
    pub lambda_b: f64,
    /// Cellular user density.
    pub lambda_c: f64,
    /// Intra-operator D2D transmitter density.
    pub lambda_d: f64,
    /// Normalized cellular target rate.
    pub tau: f64,
    /// Intra-operator D2D rate floor.
    pub mu_d: f64,
    /// Mode-selection threshold in the intra-operator D2D band.
    pub eps_d_dbm: f64,
    /// Portion of time a cellular-mode user is active.
    pub nu: f64,
}

impl Default for OperatorParams {
    fn default() -> Self {
        Self {
            lambda_b: REFERENCE_BS_DENSITY,
            lambda_c: REFERENCE_BS_DENSITY,
            lambda_d: REFERENCE_BS_DENSITY,
            tau: 0.3,
            mu_d: 0.3,
            eps_d_dbm: -75.0,
            nu: 1.0,
        }
    }
}

impl OperatorParams {
    fn validate(&self, field: &str) -> Result<(), ModelError> {
        let density = |name: &str, v: f64, strict: bool| {
            if !v.is_finite() || v < 0.0 || (strict && v == 0.0) {
                Err(ModelError::InvalidDensity {
                    field: format!("{field}/{name}"),
                    value: v,
                })
            } else {
                Ok(())
            }
        };
        density("lambda_b", self.lambda_b, true)?;
        density("lambda_c", self.lambda_c, false)?;
        density("lambda_d", self.lambda_d, false)?;

        let fraction = |name: &str, v: f64, ok: bool| {
            if v.is_finite() && ok {
                Ok(())
            } else {
                Err(ModelError::InvalidFraction {
                    field: format!("{field}/{name}"),
                    value: v,
                })
            }
        };
        fraction("tau", self.tau, self.tau > 0.0 && self.tau < 1.0)?;
        fraction("mu_d", self.mu_d, self.mu_d >= 0.0 && self.mu_d < 1.0)?;
        fraction("nu", self.nu, self.nu > 0.0 && self.nu <= 1.0)?;

        if !self.eps_d_dbm.is_finite() {
            return Err(ModelError::InvalidValue {
                field: format!("{field}/eps_d_dbm"),
                value: self.eps_d_dbm,
            });
        }
        Ok(())
    }
}

/// Parameters common to both operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharedParams {
    /// Multi-operator D2D transmitter density (λ/2 per operator).
    pub lambda: f64,
    /// Mode-selection threshold in the shared band.
    pub eps_dbm: f64,
    /// D2D pair distance.
    pub d: f64,
    pub pt_d_dbm: f64,
    pub pt_c_dbm: f64,
    /// Noise power over the full cellular band.
    pub noise_dbm: f64,
    pub pl_cellular: PathlossModel,
    pub pl_d2d: PathlossModel,
}

impl Default for SharedParams {
    fn default() -> Self {
        Self {
            lambda: 4.0 * REFERENCE_BS_DENSITY,
            eps_dbm: -72.0,
            d: 30.0,
            pt_d_dbm: 20.0,
            pt_c_dbm: 23.0,
            // -174 dBm/Hz over 10 MHz
            noise_dbm: -104.0,
            pl_cellular: PathlossModel::cellular_reference(),
            pl_d2d: PathlossModel::d2d_reference(),
        }
    }
}

impl SharedParams {
    pub fn pt_d_mw(&self) -> f64 {
        db_to_linear(self.pt_d_dbm)
    }

    pub fn noise_mw(&self) -> f64 {
        db_to_linear(self.noise_dbm)
    }

    /// Full-band SNR of the D2D link, `P_t l(d) / σ²`.
    pub fn snr_full_band(&self) -> f64 {
        let loss_db = self.pl_d2d.slope_db_per_decade * self.d.log10() + self.pl_d2d.intercept_db;
        db_to_linear(self.pt_d_dbm - loss_db - self.noise_dbm)
    }

    fn validate(&self, field: &str) -> Result<(), ModelError> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(ModelError::InvalidDensity {
                field: format!("{field}/lambda"),
                value: self.lambda,
            });
        }
        if !self.d.is_finite() || self.d <= 0.0 {
            return Err(ModelError::InvalidValue {
                field: format!("{field}/d"),
                value: self.d,
            });
        }
        for (name, v) in [
            ("eps_dbm", self.eps_dbm),
            ("pt_d_dbm", self.pt_d_dbm),
            ("pt_c_dbm", self.pt_c_dbm),
            ("noise_dbm", self.noise_dbm),
        ] {
            if !v.is_finite() {
                return Err(ModelError::InvalidValue {
                    field: format!("{field}/{name}"),
                    value: v,
                });
            }
        }
        self.pl_cellular.validate(&format!("{field}/pl_cellular"))?;
        self.pl_d2d.validate(&format!("{field}/pl_d2d"))?;
        Ok(())
    }
}

/// A complete two-operator scenario. Construct through [`validate_scenario`]
/// or check a deserialized value with [`Scenario::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scenario {
    pub operators: [OperatorParams; 2],
    pub shared: SharedParams,
}

impl Scenario {
    /// The reference scenario: symmetric operators, λ = 4λ_b, ε = -72 dBm,
    /// ε_d = -75 dBm.
    pub fn reference() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, op) in self.operators.iter().enumerate() {
            op.validate(&format!("/operators/{i}"))?;
        }
        self.shared.validate("/shared")
    }

    /// Ratio of multi-operator to intra-operator D2D transmitters for
    /// operator `i`.
    pub fn multiop_ratio(&self, i: usize) -> f64 {
        crate::mode_selection::multiop_ratio(self.shared.lambda, self.operators[i].lambda_d)
            .unwrap_or(0.0)
    }
}

pub fn validate_scenario(
    operators: [OperatorParams; 2],
    shared: SharedParams,
) -> Result<Scenario, ModelError> {
    let s = Scenario { operators, shared };
    s.validate()?;
    Ok(s)
}

/// Per-operator split of the spectrum into cellular, intra-operator D2D and
/// shared-band fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPartition {
    pub beta_c: f64,
    pub beta_d: f64,
    pub beta: f64,
}

impl SpectrumPartition {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(beta_c: f64, beta_d: f64, beta: f64) -> Result<Self, ModelError> {
        for (name, v) in [("beta_c", beta_c), ("beta_d", beta_d), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ModelError::InvalidFraction {
                    field: name.to_string(),
                    value: v,
                });
            }
        }
        let sum = beta_c + beta_d + beta;
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(ModelError::InvalidFraction {
                field: "beta_c+beta_d+beta".to_string(),
                value: sum,
            });
        }
        Ok(Self {
            beta_c,
            beta_d,
            beta,
        })
    }

    /// Partition with the intra-operator D2D share taking the remainder.
    pub fn from_shared(beta_c: f64, beta: f64) -> Result<Self, ModelError> {
        Self::new(beta_c, 1.0 - beta_c - beta, beta)
    }
}

/// Result of threshold-based mode selection in one band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSelectionOutcome {
    /// Hardcore distance between transmitters in D2D mode.
    pub delta: f64,
    /// Fraction of transmitters selecting D2D mode.
    pub q: f64,
    /// Density of users served in cellular mode by the operator.
    pub cellular_mode_density: f64,
    /// BS activity probability.
    pub alpha: f64,
}

/// Spectral efficiencies, rates and utility of one operator at one
/// strategy profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub r_c: f64,
    pub r_d: f64,
    pub r_shared: f64,
    pub q_c: f64,
    pub q_d: f64,
    pub q_s: f64,
    pub u: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub beta_1: f64,
    pub beta_2: f64,
    pub u_1: f64,
    pub u_2: f64,
}

/// Outcome of a best-response run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameState {
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
    pub ne: (f64, f64),
    /// Utilities at the NE.
    pub utilities: (f64, f64),
    /// Utilities without spectrum sharing.
    pub baseline: (f64, f64),
    pub agreement: bool,
}
