//! The Veselova system: a rigid body with a fixed point under the
//! nonholonomic constraint `(omega, gamma) = b`, optionally carrying a rotor
//! with gyrostatic momentum `k`.
//!
//! With `w = (gamma, Ahat gamma)` and `q = (Ahat M - M - k, gamma)`:
//!
//! ```text
//! H = 1/2 ((Ahat M, M) - q^2 / w) + U(gamma)
//! S = -q / w
//! g = sqrt(w),  f = 1/sqrt(w),  Phi = (k, gamma)/sqrt(w)
//! omega = Ahat (M + S gamma),   (M + k, gamma) = (omega, gamma)
//! ```
//!
//! For `k = 0` this is the classical system; for `k != 0` the flow keeps the
//! extra integral `(M + k, M + k)` when `U = 0`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::potential::Potential;
use crate::error::{Error, Result};
use crate::math::{ScalarFn, StateTS2, Vec3};
use crate::sphere::{Hamiltonian, NamedIntegral, SFunctionSpec, SphereSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VeselovaParams {
    /// Diagonal of `Ahat = I^{-1}`.
    pub ahat: [f64; 3],
    #[serde(default)]
    pub potential: Potential,
    #[serde(default)]
    pub k: [f64; 3],
    /// Value of the constraint `(omega, gamma) = (M + k, gamma)`; used only
    /// when generating initial conditions.
    #[serde(default)]
    pub b: f64,
}

impl Default for VeselovaParams {
    fn default() -> Self {
        VeselovaParams {
            ahat: [0.6, 0.75, 0.9],
            potential: Potential::Zero,
            k: [0.0; 3],
            b: 0.0,
        }
    }
}

impl VeselovaParams {
    pub fn ahat_vec(&self) -> Vec3 {
        Vec3::from_array(self.ahat)
    }

    pub fn k_vec(&self) -> Vec3 {
        Vec3::from_array(self.k)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &a) in self.ahat.iter().enumerate() {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Domain(format!("Veselova inverse inertia Ahat[{}] = {a} must be positive", i + 1)));
            }
        }
        if !self.k.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("gyrostatic momentum must be finite".into()));
        }
        Ok(())
    }

    /// `(gamma, Ahat gamma)`
    pub fn w(&self, gamma: Vec3) -> f64 {
        gamma.dot(self.ahat_vec().hadamard(gamma))
    }

    /// `(Ahat M - M - k, gamma)`
    pub fn q(&self, m: Vec3, gamma: Vec3) -> f64 {
        (self.ahat_vec().hadamard(m) - m - self.k_vec()).dot(gamma)
    }

    /// `S = -(Ahat M - M - k, gamma) / (Ahat gamma, gamma)`, the function
    /// entering the equations of motion.
    pub fn s(&self, m: Vec3, gamma: Vec3) -> f64 {
        -self.q(m, gamma) / self.w(gamma)
    }

    /// `(Ahat M - M - k, gamma) / (Ahat gamma, gamma)`, the conventional
    /// display form. Equals `-S`, so `omega = Ahat (M - s_display gamma)`.
    pub fn s_display(&self, m: Vec3, gamma: Vec3) -> f64 {
        self.q(m, gamma) / self.w(gamma)
    }

    /// Multiplier `lambda` in `M = Ahat^{-1} omega + lambda gamma`; equals
    /// `(Ahat M - M - k, gamma)/(Ahat gamma, gamma) = -S` on the unit sphere.
    pub fn lambda(&self, omega: Vec3, gamma: Vec3) -> f64 {
        let a = self.ahat_vec();
        let ainv_minus_e = Vec3::new(omega.x / a.x, omega.y / a.y, omega.z / a.z) - omega;
        -(ainv_minus_e + self.k_vec()).dot(gamma)
    }
}

pub struct VeselovaHamiltonian {
    pub params: VeselovaParams,
}

impl Hamiltonian for VeselovaHamiltonian {
    fn value(&self, x: &StateTS2) -> f64 {
        let p = &self.params;
        let q = p.q(x.m, x.gamma);
        0.5 * (p.ahat_vec().hadamard(x.m).dot(x.m) - q * q / p.w(x.gamma)) + p.potential.eval(x.gamma)
    }

    fn gradient(&self, x: &StateTS2) -> (Vec3, Vec3) {
        let p = &self.params;
        let a = p.ahat_vec();
        let s = p.s(x.m, x.gamma);
        // dH/dM = Ahat M + S (Ahat - E) gamma
        // dH/dgamma = S ((Ahat - E) M - k) + S^2 Ahat gamma + dU
        let hm = a.hadamard(x.m) + (a.hadamard(x.gamma) - x.gamma) * s;
        let hg = (a.hadamard(x.m) - x.m - p.k_vec()) * s + a.hadamard(x.gamma) * (s * s) + p.potential.grad(x.gamma);
        (hm, hg)
    }
}

/// Builds the Veselova system (gyrostatic when `k != 0`).
///
/// The extra integral `F3 = (M + k, M + k)` is registered when `U = 0`.
pub fn veselova_system(params: &VeselovaParams) -> Result<SphereSystem> {
    params.validate()?;
    let a = params.ahat_vec();
    let k = params.k_vec();
    let w = move |p: Vec3| p.dot(a.hadamard(p));

    let g = ScalarFn::new(move |p| w(p).sqrt())
        .with_gradient(move |p| a.hadamard(p) / w(p).sqrt())
        .shared();
    let f = ScalarFn::new(move |p| 1.0 / w(p).sqrt())
        .with_gradient(move |p| a.hadamard(p) * (-w(p).powf(-1.5)))
        .shared();
    let phi = ScalarFn::new(move |p| k.dot(p) / w(p).sqrt())
        .with_gradient(move |p| {
            let wv = w(p);
            k / wv.sqrt() - a.hadamard(p) * (k.dot(p) * wv.powf(-1.5))
        })
        .shared();

    let spec = SFunctionSpec::Reduced { g, f, phi };
    let name = if k == Vec3::ZERO { "veselova" } else { "veselova-gyrostat" };
    let ham = Arc::new(VeselovaHamiltonian { params: params.clone() });
    let mut sys = SphereSystem::new(name, ham, spec, k)?;
    if params.potential.is_zero() {
        sys = sys.with_integral(NamedIntegral::new("F3", move |x: &StateTS2| (x.m + k).norm_squared()));
    }
    Ok(sys)
}

/// `M = Ahat^{-1} omega - ((Ahat^{-1} - E) omega + k, gamma) gamma`
pub fn veselova_m_from_omega(params: &VeselovaParams, omega: Vec3, gamma: Vec3) -> Vec3 {
    let a = params.ahat_vec();
    Vec3::new(omega.x / a.x, omega.y / a.y, omega.z / a.z) + gamma * params.lambda(omega, gamma)
}

/// `omega = Ahat (M + S gamma)`
pub fn veselova_omega_from_m(params: &VeselovaParams, m: Vec3, gamma: Vec3) -> Vec3 {
    params.ahat_vec().hadamard(m + gamma * params.s(m, gamma))
}

/// Shifts `M` along `gamma` so that `(M + k, gamma) = b`.
pub fn with_constraint_value(params: &VeselovaParams, x: StateTS2) -> StateTS2 {
    let gamma = x.gamma;
    let current = (x.m + params.k_vec()).dot(gamma) / gamma.norm_squared();
    let target = params.b / gamma.norm_squared();
    StateTS2::new(x.m + gamma * (target - current), gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sampling::{probe_rng, random_state};
    use crate::sphere::{integrals, s_value};

    #[test]
    fn identity_inertia_is_free_top() {
        let params = VeselovaParams {
            ahat: [1.0; 3],
            ..VeselovaParams::default()
        };
        let sys = veselova_system(&params).unwrap();
        let x = StateTS2::new(Vec3::new(0.3, -0.2, 1.4), Vec3::new(0.0, 0.6, 0.8));
        assert!((sys.hamiltonian.value(&x) - 0.5 * x.m.norm_squared()).abs() < 1e-15);
        assert!(s_value(&sys, &x).unwrap().abs() < 1e-15);
    }

    #[test]
    fn gyrostat_with_identity_inertia() {
        // Ahat = E: S = (k, gamma)
        let params = VeselovaParams {
            ahat: [1.0; 3],
            k: [0.1, -0.3, 0.2],
            ..VeselovaParams::default()
        };
        let sys = veselova_system(&params).unwrap();
        let mut rng = probe_rng(4);
        for _ in 0..20 {
            let x = random_state(&mut rng, 2.0);
            let expected = params.k_vec().dot(x.gamma);
            assert!((s_value(&sys, &x).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn constraint_value_adjustment() {
        let params = VeselovaParams {
            k: [0.0, 0.0, 0.1],
            b: 0.35,
            ..VeselovaParams::default()
        };
        let sys = veselova_system(&params).unwrap();
        let x = with_constraint_value(&params, StateTS2::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.6, 0.0, 0.8)));
        assert!((integrals(&sys, &x).f2 - 0.35).abs() < 1e-15);
    }

    #[test]
    fn f3_registered_only_without_potential() {
        let free = veselova_system(&VeselovaParams::default()).unwrap();
        assert_eq!(free.extras.len(), 1);
        let heavy = veselova_system(&VeselovaParams {
            potential: Potential::linear(Vec3::E3),
            ..VeselovaParams::default()
        })
        .unwrap();
        assert!(heavy.extras.is_empty());
    }

    #[test]
    fn k_field_without_gyrostat() {
        // K = -(Ahat - E) gamma / (gamma, Ahat gamma)
        let params = VeselovaParams::default();
        let sys = veselova_system(&params).unwrap();
        let a = params.ahat_vec();
        let mut rng = probe_rng(8);
        for _ in 0..50 {
            let gamma = crate::math::sampling::random_unit(&mut rng);
            let expected = (a.hadamard(gamma) - gamma) * (-1.0 / params.w(gamma));
            assert!((sys.k_vector(gamma).unwrap() - expected).max_abs() < 1e-14);
        }
    }

    #[test]
    fn dynamic_s_is_negated_display_form() {
        let params = VeselovaParams {
            k: [0.05, -0.1, 0.2],
            ..VeselovaParams::default()
        };
        let sys = veselova_system(&params).unwrap();
        let mut rng = probe_rng(9);
        for _ in 0..100 {
            let x = random_state(&mut rng, 2.0);
            let s = s_value(&sys, &x).unwrap();
            assert!((s + params.s_display(x.m, x.gamma)).abs() < 1e-13);
        }
    }

    #[test]
    fn momentum_velocity_round_trip() {
        let params = VeselovaParams {
            k: [0.0, 0.0, 0.1],
            ..VeselovaParams::default()
        };
        let mut rng = probe_rng(10);
        for _ in 0..100 {
            let x = random_state(&mut rng, 2.0);
            let omega = veselova_omega_from_m(&params, x.m, x.gamma);
            let back = veselova_m_from_omega(&params, omega, x.gamma);
            assert!((back - x.m).max_abs() < 1e-12);
            assert!(((x.m + params.k_vec()).dot(x.gamma) - omega.dot(x.gamma)).abs() < 1e-14);
            let w = crate::math::sampling::random_in_cube(&mut rng, 2.0);
            let m = veselova_m_from_omega(&params, w, x.gamma);
            assert!((veselova_omega_from_m(&params, m, x.gamma) - w).max_abs() < 1e-12);
        }
    }

    #[test]
    fn identity_inertia_maps_are_trivial() {
        let params = VeselovaParams {
            ahat: [1.0; 3],
            ..VeselovaParams::default()
        };
        let omega = Vec3::new(0.3, 1.1, -0.4);
        let gamma = Vec3::new(0.0, 0.6, 0.8);
        assert!((veselova_m_from_omega(&params, omega, gamma) - omega).max_abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_inertia() {
        let params = VeselovaParams {
            ahat: [0.5, 0.0, 1.0],
            ..VeselovaParams::default()
        };
        assert!(matches!(veselova_system(&params), Err(Error::Domain(_))));
    }
}
