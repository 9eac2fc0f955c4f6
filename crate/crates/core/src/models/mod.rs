//! Concrete systems: the Chaplygin ball and the Veselova system, each with an
//! optional gyrostat, their momentum/velocity maps and the duality between them.

mod ball;
mod duality;
mod potential;
mod veselova;

pub use ball::{ball_m_from_omega, ball_omega_from_m, ball_system, BallHamiltonian, BallParams};
pub use duality::duality_map;
pub use potential::Potential;
pub use veselova::{
    veselova_m_from_omega, veselova_omega_from_m, veselova_system, with_constraint_value, VeselovaHamiltonian,
    VeselovaParams,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::math::{StateTS2, Vec3};
use crate::sphere::SphereSystem;

/// A model selected by name together with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Ball(BallParams),
    Veselova(VeselovaParams),
}

impl ModelConfig {
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "ball" => Some(ModelConfig::Ball(BallParams::default())),
            "veselova" => Some(ModelConfig::Veselova(VeselovaParams::default())),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Ball(_) => "ball",
            ModelConfig::Veselova(_) => "veselova",
        }
    }

    pub fn system(&self) -> Result<SphereSystem> {
        match self {
            ModelConfig::Ball(p) => ball_system(p),
            ModelConfig::Veselova(p) => veselova_system(p),
        }
    }

    pub fn set_gyrostat(&mut self, k: [f64; 3]) {
        match self {
            ModelConfig::Ball(p) => p.k = k,
            ModelConfig::Veselova(p) => p.k = k,
        }
    }

    pub fn set_potential(&mut self, u: Potential) {
        match self {
            ModelConfig::Ball(p) => p.potential = u,
            ModelConfig::Veselova(p) => p.potential = u,
        }
    }

    pub fn m_from_omega(&self, omega: Vec3, gamma: Vec3) -> Vec3 {
        match self {
            ModelConfig::Ball(p) => ball_m_from_omega(p, omega, gamma),
            ModelConfig::Veselova(p) => veselova_m_from_omega(p, omega, gamma),
        }
    }
}

/// Relative drift `sup |F(t) - F(0)| / max(1, |F(0)|)` of every registered
/// extra integral along a sequence of states.
pub fn extra_integral_checks(sys: &SphereSystem, states: &[StateTS2]) -> Vec<(String, f64)> {
    sys.extras
        .iter()
        .map(|integral| {
            let drift = match states.first() {
                None => 0.0,
                Some(first) => {
                    let f0 = (integral.eval)(first);
                    let scale = f0.abs().max(1.0);
                    states.iter().map(|x| ((integral.eval)(x) - f0).abs() / scale).fold(0.0, f64::max)
                }
            };
            (integral.name.clone(), drift)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sampling::{probe_rng, random_state};
    use crate::sphere::rhs;

    #[test]
    fn f3_reduces_to_m2_without_gyrostat() {
        let sys = veselova_system(&VeselovaParams::default()).unwrap();
        let x = StateTS2::new(Vec3::new(0.3, -1.0, 0.7), Vec3::E2);
        assert_eq!((sys.extras[0].eval)(&x), x.m.norm_squared());
    }

    #[test]
    fn f3_is_conserved_along_gyrostat_flow() {
        let params = VeselovaParams {
            k: [0.0, 0.0, 0.1],
            ..VeselovaParams::default()
        };
        let sys = veselova_system(&params).unwrap();
        let k = params.k_vec();
        let mut rng = probe_rng(21);
        for _ in 0..100 {
            let x = random_state(&mut rng, 2.0);
            let (dm, _) = rhs(&sys, &x).unwrap();
            // grad F3 = (2 (M + k), 0)
            assert!(((x.m + k) * 2.0).dot(dm).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_trajectory_has_no_drift() {
        let sys = ball_system(&BallParams::default()).unwrap();
        let x = StateTS2::new(Vec3::E1, Vec3::E3);
        let report = extra_integral_checks(&sys, &[x, x, x]);
        assert_eq!(report, vec![("M2".to_string(), 0.0)]);
    }

    #[test]
    fn model_config_json_round_trip() {
        let mut m = ModelConfig::by_name("veselova").unwrap();
        m.set_gyrostat([0.0, 0.0, 0.1]);
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"kind\":\"veselova\""));
        let back: ModelConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.system().unwrap().name, "veselova-gyrostat");
        assert!(ModelConfig::by_name("top").is_none());
    }
}
