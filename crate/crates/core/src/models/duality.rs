//! Ball/Veselova duality.
//!
//! For a Veselova system with `k = 0` and inverse inertia `Ahat`, the ball with
//! `A = (E - Ahat)/D` and `U1 = -U2/D` satisfies, on the unit sphere,
//!
//! ```text
//! H_ball = M^2 / (2D) - H_veselova / D
//! ```
//!
//! so both flows share the integral `M^2` and their `g` functions differ by the
//! constant factor `D^{-1/2}`.

use super::ball::BallParams;
use super::veselova::VeselovaParams;
use crate::error::{Error, Result};

pub fn duality_map(vparams: &VeselovaParams, d: f64) -> Result<BallParams> {
    vparams.validate()?;
    if vparams.k.iter().any(|v| *v != 0.0) {
        return Err(Error::Precondition("duality requires a Veselova system without gyrostat (k = 0)".into()));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("duality parameter D = {d} must be positive")));
    }
    for (i, &a) in vparams.ahat.iter().enumerate() {
        if a >= 1.0 {
            return Err(Error::Domain(format!(
                "Ahat[{}] = {a} >= 1 gives a non-positive ball matrix A along axis e{}",
                i + 1,
                i + 1
            )));
        }
    }
    let params = BallParams {
        a: vparams.ahat.map(|a| (1.0 - a) / d),
        d,
        potential: vparams.potential.scaled(-1.0 / d),
        k: [0.0; 3],
    };
    params.validate()?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sampling::{probe_rng, random_state, random_unit};
    use crate::math::Vec3;
    use crate::models::potential::Potential;
    use crate::models::{ball_system, veselova_system};

    fn heavy() -> VeselovaParams {
        VeselovaParams {
            potential: Potential::linear(Vec3::new(0.2, -0.1, 0.5)),
            ..VeselovaParams::default()
        }
    }

    #[test]
    fn hamiltonians_are_dual() {
        for d in [0.5, 1.0, 2.0] {
            let vp = heavy();
            let bp = duality_map(&vp, d).unwrap();
            let ball = ball_system(&bp).unwrap();
            let ves = veselova_system(&vp).unwrap();
            let mut rng = probe_rng(3);
            for _ in 0..1000 {
                let x = random_state(&mut rng, 2.0);
                let h1 = ball.hamiltonian.value(&x);
                let h2 = ves.hamiltonian.value(&x);
                let r = h1 - 0.5 / d * x.m.norm_squared() + h2 / d;
                assert!(r.abs() <= 1e-12, "D={d}: {r:e}");
            }
        }
    }

    #[test]
    fn g_functions_differ_by_constant() {
        let d = 1.7;
        let vp = VeselovaParams::default();
        let ball = ball_system(&duality_map(&vp, d).unwrap()).unwrap();
        let ves = veselova_system(&vp).unwrap();
        let mut rng = probe_rng(4);
        for _ in 0..200 {
            let p = random_unit(&mut rng);
            let r = ball.g_value(p).unwrap() - ves.g_value(p).unwrap() / d.sqrt();
            assert!(r.abs() <= 1e-12);
        }
    }

    #[test]
    fn identity_inertia_is_rejected() {
        let vp = VeselovaParams {
            ahat: [1.0; 3],
            ..VeselovaParams::default()
        };
        assert!(matches!(duality_map(&vp, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gyrostat_is_rejected() {
        let vp = VeselovaParams {
            k: [0.0, 0.0, 0.1],
            ..VeselovaParams::default()
        };
        assert!(matches!(duality_map(&vp, 1.0), Err(Error::Precondition(_))));
    }
}
