//! Evaluation and inversion of log-distance pathloss laws.

use thiserror::Error;

use crate::model::{db_to_linear, PathlossModel};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PathlossError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
}

impl PathlossModel {
    /// Attenuation in dB at distance `r` meters.
    pub fn loss_db(&self, r: f64) -> Result<f64, PathlossError> {
        if !(r > 0.0) {
            return Err(PathlossError::NonPositiveDistance(r));
        }
        Ok(self.slope_db_per_decade * r.log10() + self.intercept_db)
    }

    /// Linear power gain at distance `r` meters.
    pub fn gain(&self, r: f64) -> Result<f64, PathlossError> {
        self.loss_db(r).map(|l| db_to_linear(-l))
    }

    /// Distance at which the attenuation equals `loss_db`.
    pub fn invert(&self, loss_db: f64) -> f64 {
        10f64.powf((loss_db - self.intercept_db) / self.slope_db_per_decade)
    }
}

pub fn gain(model: &PathlossModel, r: f64) -> Result<f64, PathlossError> {
    model.gain(r)
}

pub fn invert(model: &PathlossModel, loss_db: f64) -> f64 {
    model.invert(loss_db)
}
