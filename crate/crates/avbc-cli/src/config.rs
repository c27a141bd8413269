//! JSON configuration shared by every subcommand: a flat schema naming the
//! channel family, its parameters, and the simulation knobs, with the
//! figure parameter sets as per-family defaults for anything omitted.

use std::path::Path;

use avbc_core::bsbc::{Example1Params, Example2Params};
use avbc_core::channel::{BroadcastChannel, StateDmc};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// "example1" (two private messages) or "example2" (degraded message
    /// sets; the default)
    pub family: Option<String>,
    pub theta0: Option<f64>,
    pub theta1: Option<f64>,
    pub alpha: Option<f64>,
    pub eps0: Option<f64>,
    pub eps1: Option<f64>,
    /// State frequency for `rp-capacity`; jammer bias for `simulate`
    pub q: Option<f64>,
    /// Raw state-dependent channel for `symmetrizable`
    pub dmc: Option<DmcConfig>,
    /// Blocklength for `simulate` / `eliminate`
    pub n: Option<usize>,
    /// Satellite crossover of the strategy codebook for `simulate`
    pub beta: Option<f64>,
    /// Rate scaling relative to the worst-state corner for `simulate`
    pub scale: Option<f64>,
    /// Explicit message counts for `simulate` (override `scale`)
    pub m0: Option<u64>,
    pub m1: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmcConfig {
    pub nu: usize,
    pub ns: usize,
    pub ny: usize,
    /// Row-major probabilities indexed (u, s, y)
    pub probs: Vec<f64>,
}

pub enum Family {
    Example1(Example1Params),
    Example2(Example2Params),
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, Failure> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Invalid(format!("malformed config {}: {e}", path.display())))
    }

    pub fn family(&self) -> Result<Family, Failure> {
        match self.family.as_deref().unwrap_or("example2") {
            "example1" => Ok(Family::Example1(Example1Params::new(
                self.theta0.unwrap_or(0.005),
                self.theta1.unwrap_or(0.9),
                self.alpha.unwrap_or(0.2),
            )?)),
            "example2" => Ok(Family::Example2(Example2Params::new(
                self.theta0.unwrap_or(0.12),
                self.theta1.unwrap_or(0.85),
                self.eps0.unwrap_or(0.18),
                self.eps1.unwrap_or(0.78),
            )?)),
            other => Err(Failure::Invalid(format!(
                "unknown family {other:?}: expected \"example1\" or \"example2\""
            ))),
        }
    }

    pub fn channel(&self) -> Result<BroadcastChannel, Failure> {
        Ok(match self.family()? {
            Family::Example1(p) => p.channel()?,
            Family::Example2(p) => p.channel()?,
        })
    }

    pub fn state_dmc(&self) -> Result<Option<StateDmc>, Failure> {
        match &self.dmc {
            None => Ok(None),
            Some(d) => Ok(Some(StateDmc::new(d.nu, d.ns, d.ny, d.probs.clone())?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_default_family_is_example2_fig3() {
        let cfg = Config::default();
        match cfg.family().unwrap() {
            Family::Example2(p) => {
                assert_eq!((p.theta0, p.theta1, p.eps0, p.eps1), (0.12, 0.85, 0.18, 0.78));
            }
            Family::Example1(_) => panic!("default family should be example2"),
        }
    }

    #[test]
    fn test_field_overrides_apply() {
        let cfg: Config = serde_json::from_str(r#"{"eps0": 0.22, "eps1": 0.88}"#).unwrap();
        match cfg.family().unwrap() {
            Family::Example2(p) => assert_eq!((p.eps0, p.eps1), (0.22, 0.88)),
            Family::Example1(_) => panic!("family should stay example2"),
        }
    }

    #[test]
    fn test_unknown_fields_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"thetaO": 0.1}"#).is_err());
    }

    #[test]
    fn test_invalid_params_are_invalid_input() {
        let cfg: Config = serde_json::from_str(r#"{"family": "example1", "alpha": 0.7}"#).unwrap();
        assert!(matches!(cfg.family(), Err(Failure::Invalid(_))));
    }
}
