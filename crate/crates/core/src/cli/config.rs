//! JSON run configuration for `simulate`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::sampling::{probe_rng, random_state};
use crate::math::{StateTS2, Vec3};
use crate::models::{with_constraint_value, ModelConfig};
use crate::sim::IntegratorConfig;
use crate::tolerance::Tolerances;
use crate::verify::M_SCALE;

/// Current version of every JSON document the tool writes.
pub const SCHEMA_VERSION: u32 = 1;

/// `gamma` further than this from the unit sphere is renormalized with a
/// warning; closer values are renormalized silently.
pub const GAMMA_WARN: f64 = 1e-6;

/// Initial condition given either by momenta or by angular velocity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialCondition {
    Momentum { m: [f64; 3], gamma: [f64; 3] },
    Velocity { omega: [f64; 3], gamma: [f64; 3] },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_model")]
    pub model: ModelConfig,
    /// A random state drawn from `seed` when absent.
    #[serde(default)]
    pub initial: Option<InitialCondition>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_drift_tolerance")]
    pub drift_tolerance: f64,
}

fn default_model() -> ModelConfig {
    ModelConfig::by_name("ball").expect("built-in model")
}

fn default_drift_tolerance() -> f64 {
    Tolerances::default().integral_drift
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: default_model(),
            initial: None,
            integrator: IntegratorConfig::default(),
            output: OutputPaths::default(),
            seed: 0,
            drift_tolerance: default_drift_tolerance(),
        }
    }
}

/// The initial condition used by `simulate --demo`.
pub fn demo_initial() -> InitialCondition {
    InitialCondition::Momentum {
        m: [0.3, -0.5, 0.8],
        gamma: [0.0, 0.6, 0.8],
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid run config: {e}")))
    }

    /// Resolves the initial state for the configured model, together with any
    /// warnings raised while normalizing `gamma`.
    pub fn initial_state(&self) -> Result<(StateTS2, Vec<String>)> {
        let mut warnings = Vec::new();
        let state = match &self.initial {
            None => {
                let x = random_state(&mut probe_rng(self.seed), M_SCALE);
                match &self.model {
                    ModelConfig::Veselova(p) => with_constraint_value(p, x),
                    ModelConfig::Ball(_) => x,
                }
            }
            Some(InitialCondition::Momentum { m, gamma }) => {
                let gamma = normalize_gamma(Vec3::from_array(*gamma), &mut warnings)?;
                StateTS2::new(finite(Vec3::from_array(*m), "initial M")?, gamma)
            }
            Some(InitialCondition::Velocity { omega, gamma }) => {
                let gamma = normalize_gamma(Vec3::from_array(*gamma), &mut warnings)?;
                let omega = finite(Vec3::from_array(*omega), "initial omega")?;
                StateTS2::new(self.model.m_from_omega(omega, gamma), gamma)
            }
        };
        Ok((state, warnings))
    }
}

fn finite(v: Vec3, what: &str) -> Result<Vec3> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{what} must be finite")))
    }
}

/// Scales `gamma` onto the unit sphere, warning when the input was off by
/// more than [`GAMMA_WARN`].
pub fn normalize_gamma(gamma: Vec3, warnings: &mut Vec<String>) -> Result<Vec3> {
    let n = finite(gamma, "initial gamma")?.norm();
    if n == 0.0 {
        return Err(Error::Config("initial gamma must be non-zero".into()));
    }
    if (n - 1.0).abs() > GAMMA_WARN {
        warnings.push(format!("initial gamma has norm {n}; renormalized to the unit sphere"));
    }
    Ok(gamma / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn full_config_parses() {
        let text = r#"{
            "model": {"kind": "veselova", "ahat": [0.6, 0.75, 0.9], "k": [0, 0, 0.1]},
            "initial": {"omega": [0.1, 0.2, 0.3], "gamma": [0, 0, 2]},
            "integrator": {"rtol": 1e-9, "horizon": 5},
            "seed": 4
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg.integrator.rtol, 1e-9);
        assert_eq!(cfg.integrator.atol, IntegratorConfig::default().atol);
        let (x, warnings) = cfg.initial_state().unwrap();
        assert_eq!(x.gamma, Vec3::E3);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn unknown_fields_are_config_errors() {
        assert!(matches!(RunConfig::from_json(r#"{"modle": 1}"#), Err(Error::Config(_))));
        assert!(matches!(
            RunConfig::from_json(r#"{"integrator": {"rtoll": 1}}"#),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn tiny_gamma_error_is_silent() {
        let mut w = Vec::new();
        let g = normalize_gamma(Vec3::new(0.0, 0.0, 1.0 + 1e-9), &mut w).unwrap();
        assert!(w.is_empty());
        assert!((g.norm() - 1.0).abs() < 1e-15);
        assert!(normalize_gamma(Vec3::ZERO, &mut w).is_err());
    }

    #[test]
    fn random_veselova_start_meets_constraint() {
        let mut cfg = RunConfig {
            model: ModelConfig::by_name("veselova").unwrap(),
            ..RunConfig::default()
        };
        if let ModelConfig::Veselova(p) = &mut cfg.model {
            p.b = 0.25;
        }
        let (x, _) = cfg.initial_state().unwrap();
        assert!((x.m.dot(x.gamma) - 0.25).abs() < 1e-14);
    }
}
