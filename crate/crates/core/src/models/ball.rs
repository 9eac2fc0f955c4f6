//! The Chaplygin ball rolling without slipping on a horizontal plane.
//!
//! ```text
//! H = 1/2 ((A M, M) + (A M, gamma)^2 / (1/D - (gamma, A gamma))) + U(gamma)
//! S = (A M, gamma) / (1/D - (gamma, A gamma))
//! g = sqrt(1/D - (gamma, A gamma)),  f = 0,  Phi = 0
//! ```
//!
//! The gyrostatic ball keeps `H` and `S` unchanged; the rotor momentum `k`
//! enters only through the bracket.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::potential::Potential;
use crate::error::{Error, Result};
use crate::math::{constant, ScalarFn, StateTS2, Vec3};
use crate::sphere::{Hamiltonian, NamedIntegral, SFunctionSpec, SphereSystem};

const AXES: [&str; 3] = ["e1", "e2", "e3"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallParams {
    /// Diagonal of `A`.
    pub a: [f64; 3],
    pub d: f64,
    #[serde(default)]
    pub potential: Potential,
    /// Gyrostatic momentum.
    #[serde(default)]
    pub k: [f64; 3],
}

impl Default for BallParams {
    fn default() -> Self {
        BallParams {
            a: [0.4, 0.5, 0.6],
            d: 1.0,
            potential: Potential::Zero,
            k: [0.0; 3],
        }
    }
}

impl BallParams {
    pub fn a_vec(&self) -> Vec3 {
        Vec3::from_array(self.a)
    }

    pub fn d_inv(&self) -> f64 {
        1.0 / self.d
    }

    /// `A` diagonal and positive, `D > 0` and `1/D > max A`, so that
    /// `1/D - (gamma, A gamma) > 0` on the unit sphere.
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::Domain(format!("ball parameter D = {} must be positive", self.d)));
        }
        for (i, &ai) in self.a.iter().enumerate() {
            if !(ai > 0.0 && ai.is_finite()) {
                return Err(Error::Domain(format!(
                    "ball matrix A must be positive definite: A[{}] = {ai} along axis {}",
                    i + 1,
                    AXES[i]
                )));
            }
            if !(self.d_inv() > ai) {
                return Err(Error::Domain(format!(
                    "ball domain invariant 1/D > max A violated along axis {}: 1/D = {} <= A[{}] = {ai}",
                    AXES[i],
                    self.d_inv(),
                    i + 1
                )));
            }
        }
        if !self.k.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("gyrostatic momentum must be finite".into()));
        }
        Ok(())
    }

    /// `1/D - (gamma, A gamma)`
    pub fn u(&self, gamma: Vec3) -> f64 {
        self.d_inv() - gamma.dot(self.a_vec().hadamard(gamma))
    }

    /// `S = (A M, gamma) / u`
    pub fn s(&self, m: Vec3, gamma: Vec3) -> f64 {
        self.a_vec().hadamard(m).dot(gamma) / self.u(gamma)
    }
}

pub struct BallHamiltonian {
    pub params: BallParams,
}

impl Hamiltonian for BallHamiltonian {
    fn value(&self, x: &StateTS2) -> f64 {
        let a = self.params.a_vec();
        let am = a.hadamard(x.m);
        let p = am.dot(x.gamma);
        0.5 * (am.dot(x.m) + p * p / self.params.u(x.gamma)) + self.params.potential.eval(x.gamma)
    }

    fn gradient(&self, x: &StateTS2) -> (Vec3, Vec3) {
        let a = self.params.a_vec();
        let s = self.params.s(x.m, x.gamma);
        // dH/dM = A (M + S gamma) = omega,  dH/dgamma = S A M + S^2 A gamma + dU
        let omega = a.hadamard(x.m + x.gamma * s);
        (omega, omega * s + self.params.potential.grad(x.gamma))
    }
}

/// Builds the ball (or gyrostatic ball when `k != 0`) as a system on `R^6`.
///
/// `M^2` is registered as an extra integral when `U = 0` and `k = 0`.
pub fn ball_system(params: &BallParams) -> Result<SphereSystem> {
    params.validate()?;
    let gp = params.clone();
    let gpp = params.clone();
    let g = ScalarFn::new(move |p: Vec3| gp.u(p).sqrt())
        .with_gradient(move |p: Vec3| gpp.a_vec().hadamard(p) * (-1.0 / gpp.u(p).sqrt()))
        .shared();
    let spec = SFunctionSpec::Reduced {
        g,
        f: constant(0.0),
        phi: constant(0.0),
    };
    let k = Vec3::from_array(params.k);
    let name = if k == Vec3::ZERO { "ball" } else { "ball-gyrostat" };
    let ham = Arc::new(BallHamiltonian { params: params.clone() });
    let mut sys = SphereSystem::new(name, ham, spec, k)?;
    if params.potential.is_zero() && k == Vec3::ZERO {
        sys = sys.with_integral(NamedIntegral::new("M2", |x: &StateTS2| x.m.norm_squared()));
    }
    Ok(sys)
}

/// `M = A^{-1} omega - D (omega, gamma) gamma`
pub fn ball_m_from_omega(params: &BallParams, omega: Vec3, gamma: Vec3) -> Vec3 {
    let a = params.a_vec();
    Vec3::new(omega.x / a.x, omega.y / a.y, omega.z / a.z) - gamma * (params.d * omega.dot(gamma))
}

/// `omega = A (M + S gamma)`
pub fn ball_omega_from_m(params: &BallParams, m: Vec3, gamma: Vec3) -> Vec3 {
    params.a_vec().hadamard(m + gamma * params.s(m, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sampling::{probe_rng, random_in_cube, random_unit};
    use crate::sphere::{s_value, SFunctionSpec};

    #[test]
    fn s_vanishes_for_orthogonal_am() {
        let sys = ball_system(&BallParams::default()).unwrap();
        let x = StateTS2::new(Vec3::E1, Vec3::E3);
        assert_eq!(s_value(&sys, &x).unwrap(), 0.0);
    }

    #[test]
    fn isotropic_hamiltonian() {
        // A = aE: H = 1/2 (a M^2 + a^2 (M, gamma)^2 / (1/D - a)) + U
        let a = 0.3;
        let params = BallParams {
            a: [a; 3],
            d: 1.25,
            ..BallParams::default()
        };
        let h = BallHamiltonian { params: params.clone() };
        let mut rng = probe_rng(11);
        for _ in 0..20 {
            let gamma = random_unit(&mut rng);
            let m = random_in_cube(&mut rng, 2.0);
            let expected = 0.5 * (a * m.norm_squared() + a * a * m.dot(gamma).powi(2) / (0.8 - a));
            let got = h.value(&StateTS2::new(m, gamma));
            assert!((got - expected).abs() <= 1e-14 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn isotropic_g_is_constant() {
        let params = BallParams {
            a: [0.3; 3],
            d: 1.25,
            ..BallParams::default()
        };
        let sys = ball_system(&params).unwrap();
        let SFunctionSpec::Reduced { g, .. } = &sys.s_spec else { panic!() };
        let mut rng = probe_rng(2);
        for _ in 0..20 {
            let v = g.value(random_unit(&mut rng));
            assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn rho_times_g_is_one() {
        let sys = ball_system(&BallParams::default()).unwrap();
        let rho = sys.density().unwrap();
        let mut rng = probe_rng(5);
        for _ in 0..50 {
            let p = random_unit(&mut rng);
            assert!((rho.value(p) * sys.g_value(p).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn domain_violation_names_axis() {
        let params = BallParams {
            a: [0.4, 0.5, 1.2],
            d: 1.0,
            ..BallParams::default()
        };
        let msg = ball_system(&params).unwrap_err().to_string();
        assert!(msg.contains("axis e3"), "{msg}");
        assert!(msg.contains("1/D > max A"), "{msg}");
    }

    #[test]
    fn omega_parallel_to_gamma_isotropic() {
        let params = BallParams {
            a: [0.5; 3],
            d: 1.0,
            ..BallParams::default()
        };
        let gamma = Vec3::new(0.0, 0.6, 0.8);
        let omega = gamma * 1.7;
        let m = ball_m_from_omega(&params, omega, gamma);
        assert!((m - omega * (1.0 / 0.5 - 1.0)).max_abs() < 1e-15);
    }

    #[test]
    fn omega_is_dh_dm() {
        let params = BallParams::default();
        let h = BallHamiltonian { params: params.clone() };
        let x = StateTS2::new(Vec3::new(0.3, -0.8, 1.1), Vec3::new(0.48, 0.6, 0.64));
        assert_eq!(h.gradient(&x).0, ball_omega_from_m(&params, x.m, x.gamma));
    }
}
