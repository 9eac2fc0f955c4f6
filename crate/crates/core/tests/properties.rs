//! Randomized invariants over parameters and states.

use nonholo::gauge::{apply_gauge_state, compose, constant_gauge, inverse};
use nonholo::math::{hat, StateTS2, Vec3};
use nonholo::models::{
    ball_m_from_omega, ball_omega_from_m, ball_system, duality_map, veselova_m_from_omega, veselova_omega_from_m,
    veselova_system, BallParams, Potential, VeselovaParams,
};
use nonholo::sphere::{assemble_p, integrals, measure_residual, rhs};
use proptest::prelude::*;

fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter("not too short", |v| v.norm() > 0.1).prop_map(Vec3::normalized)
}

fn state() -> impl Strategy<Value = StateTS2> {
    (vec3(2.0), unit()).prop_map(|(m, g)| StateTS2::new(m, g))
}

/// Ball parameters inside the domain `1/D > max A`.
fn ball_params() -> impl Strategy<Value = BallParams> {
    (0.2f64..3.0, (0.05f64..0.95, 0.05f64..0.95, 0.05f64..0.95), vec3(0.3), vec3(0.5)).prop_map(
        |(d, (a1, a2, a3), k, r)| BallParams {
            a: [a1 / d, a2 / d, a3 / d],
            d,
            potential: Potential::linear(r),
            k: k.to_array(),
        },
    )
}

fn veselova_params() -> impl Strategy<Value = VeselovaParams> {
    ((0.1f64..2.0, 0.1f64..2.0, 0.1f64..2.0), vec3(0.3), vec3(0.5)).prop_map(|((a1, a2, a3), k, r)| {
        VeselovaParams {
            ahat: [a1, a2, a3],
            potential: Potential::linear(r),
            k: k.to_array(),
            b: 0.0,
        }
    })
}

fn scale(x: &StateTS2) -> f64 {
    x.m.norm().max(1.0).powi(2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hat_is_cross_product(a in vec3(3.0), b in vec3(3.0), s in -2.0f64..2.0) {
        prop_assert!((hat(a) * b - a.cross(b)).max_abs() < 1e-14);
        let lin = hat(a * s + b) - (hat(a) * s + hat(b));
        prop_assert!(lin.max_abs() < 1e-14);
        prop_assert!((hat(a) + hat(a).transpose()).max_abs() == 0.0);
    }

    #[test]
    fn ball_flow_conserves_energy_and_casimirs(p in ball_params(), x in state()) {
        let sys = ball_system(&p).unwrap();
        let (dm, dg) = rhs(&sys, &x).unwrap();
        let (hm, hg) = sys.hamiltonian.gradient(&x);
        let k = Vec3::from_array(p.k);
        prop_assert!((hm.dot(dm) + hg.dot(dg)).abs() < 1e-11 * scale(&x));
        prop_assert!((dm.dot(x.gamma) + (x.m + k).dot(dg)).abs() < 1e-11 * scale(&x));
        prop_assert!(x.gamma.dot(dg).abs() < 1e-14 * scale(&x));
        prop_assert!(measure_residual(&sys, &x).unwrap().norm() < 1e-11);
    }

    #[test]
    fn veselova_flow_conserves_energy_and_casimirs(p in veselova_params(), x in state()) {
        let sys = veselova_system(&p).unwrap();
        let (dm, dg) = rhs(&sys, &x).unwrap();
        let (hm, hg) = sys.hamiltonian.gradient(&x);
        let k = p.k_vec();
        prop_assert!((hm.dot(dm) + hg.dot(dg)).abs() < 1e-10 * scale(&x));
        prop_assert!((dm.dot(x.gamma) + (x.m + k).dot(dg)).abs() < 1e-10 * scale(&x));
        prop_assert!(measure_residual(&sys, &x).unwrap().norm() < 1e-10);
    }

    #[test]
    fn brackets_are_skew(p in ball_params(), x in state()) {
        let sys = ball_system(&p).unwrap();
        let b = assemble_p(&sys, &x).unwrap();
        prop_assert!(b.is_exactly_skew());
    }

    #[test]
    fn velocity_momentum_maps_invert(p in ball_params(), q in veselova_params(), w in vec3(2.0), g in unit()) {
        let m = ball_m_from_omega(&p, w, g);
        prop_assert!((ball_omega_from_m(&p, m, g) - w).max_abs() < 1e-12);
        let m = veselova_m_from_omega(&q, w, g);
        prop_assert!((veselova_omega_from_m(&q, m, g) - w).max_abs() < 1e-10);
    }

    #[test]
    fn duality_identity(a in (0.05f64..0.95, 0.05f64..0.95, 0.05f64..0.95), d in 0.2f64..5.0, r in vec3(0.5), x in state()) {
        let vp = VeselovaParams {
            ahat: [a.0, a.1, a.2],
            potential: Potential::linear(r),
            ..VeselovaParams::default()
        };
        let ball = ball_system(&duality_map(&vp, d).unwrap()).unwrap();
        let ves = veselova_system(&vp).unwrap();
        let r = ball.hamiltonian.value(&x) - 0.5 / d * x.m.norm_squared() + ves.hamiltonian.value(&x) / d;
        prop_assert!(r.abs() < 1e-12 * scale(&x) / d.min(1.0));
    }

    #[test]
    fn constant_gauge_group_law(
        a1 in 0.2f64..3.0, a2 in 0.2f64..3.0,
        c1 in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0], c2 in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0],
        h1 in vec3(1.0), h2 in vec3(1.0), x in state(),
    ) {
        let t1 = constant_gauge(a1, c1, h1).unwrap();
        let t2 = constant_gauge(a2, c2, h2).unwrap();
        let seq = apply_gauge_state(&t2, &apply_gauge_state(&t1, &x).unwrap()).unwrap();
        let one = apply_gauge_state(&compose(&t2, &t1), &x).unwrap();
        prop_assert!((seq.m - one.m).max_abs() < 1e-12 * scale(&x) * 10.0);
        let back = apply_gauge_state(&inverse(&t1), &apply_gauge_state(&t1, &x).unwrap()).unwrap();
        prop_assert!((back.m - x.m).max_abs() < 1e-12 * scale(&x) * 10.0);
        // The Casimir (M, gamma) scales by c.
        let y = apply_gauge_state(&t1, &x).unwrap();
        prop_assert!((y.m.dot(y.gamma) - c1 * x.m.dot(x.gamma)).abs() < 1e-12 * scale(&x) * 10.0);
    }

    #[test]
    fn integral_values_at_unit_states(p in veselova_params(), x in state()) {
        let sys = veselova_system(&p).unwrap();
        let iv = integrals(&sys, &x);
        prop_assert!((iv.f1 - 1.0).abs() < 1e-14);
        prop_assert!(iv.f3.is_finite() && iv.f2.is_finite());
    }
}
