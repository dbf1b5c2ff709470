//! JSON configuration: `operators[2]`, `shared`, `solver` and `mc`, each
//! optional and filled with reference values when absent.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::CliError;
use crate::game::SolverSettings;
use crate::model::{OperatorParams, Scenario, SharedParams};
use crate::montecarlo::{McSettings, MIN_TRIALS};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub operators: [OperatorParams; 2],
    pub shared: SharedParams,
    pub solver: SolverSettings,
    pub mc: McSettings,
}

impl Config {
    pub fn scenario(&self) -> Scenario {
        Scenario {
            operators: self.operators,
            shared: self.shared,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scenario().validate()?;
        let bad = |pointer: &str, message: String| {
            Err(CliError::Validation {
                pointer: pointer.to_string(),
                message: format!("invalid value at {pointer}: {message}"),
            })
        };
        let s = &self.solver;
        if !(s.br_tol > 0.0 && s.br_tol.is_finite()) {
            return bad(
                "/solver/br_tol",
                format!("must be positive, got {}", s.br_tol),
            );
        }
        if !(s.ne_tol > 0.0 && s.ne_tol.is_finite()) {
            return bad(
                "/solver/ne_tol",
                format!("must be positive, got {}", s.ne_tol),
            );
        }
        if s.max_iter == 0 {
            return bad("/solver/max_iter", "must be at least 1".to_string());
        }
        if self.mc.trials < MIN_TRIALS {
            return bad(
                "/mc/trials",
                format!("must be at least {MIN_TRIALS}, got {}", self.mc.trials),
            );
        }
        if !(self.mc.window_m > 0.0 && self.mc.window_m.is_finite()) {
            return bad(
                "/mc/window_m",
                format!("must be positive, got {}", self.mc.window_m),
            );
        }
        Ok(())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<Config, CliError> {
    let cfg: Config = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_reference() {
        let cfg = parse_config("{}").unwrap();
        assert_eq!(cfg.scenario(), Scenario::reference());
        assert_eq!(cfg.solver, SolverSettings::default());
    }

    #[test]
    fn partial_operator_keeps_other_defaults() {
        let cfg = parse_config(r#"{"operators":[{}, {"lambda_d": 1e-6}]}"#).unwrap();
        assert_eq!(cfg.operators[1].lambda_d, 1e-6);
        assert_eq!(cfg.operators[1].tau, OperatorParams::default().tau);
    }

    #[test]
    fn errors_carry_pointers() {
        match parse_config(r#"{"operators":[{"tau":2.0},{}]}"#) {
            Err(CliError::Validation { pointer, .. }) => assert_eq!(pointer, "/operators/0/tau"),
            other => panic!("{other:?}"),
        }
        match parse_config(r#"{"solver":{"max_iter":0}}"#) {
            Err(CliError::Validation { pointer, .. }) => assert_eq!(pointer, "/solver/max_iter"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config(""), Err(CliError::Parse(_))));
        assert!(matches!(
            parse_config(r#"{"shard":{}}"#),
            Err(CliError::Parse(_))
        ));
        assert!(matches!(
            parse_config(r#"{"operators":[{}]}"#),
            Err(CliError::Parse(_))
        ));
    }
}
