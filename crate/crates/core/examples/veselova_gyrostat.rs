//! The Veselova gyrostat: start from an angular velocity, convert to momentum
//! and watch the extra integral `(M + k)^2` alongside the energy.

use nonholo::math::Vec3;
use nonholo::math::StateTS2;
use nonholo::models::{veselova_m_from_omega, veselova_omega_from_m, veselova_system, VeselovaParams};
use nonholo::sim::{drift_report, integrate_system, IntegratorConfig};

fn main() -> nonholo::Result<()> {
    let params = VeselovaParams {
        k: [0.0, 0.0, 0.1],
        ..VeselovaParams::default()
    };
    let sys = veselova_system(&params)?;

    let gamma = Vec3::new(0.36, 0.48, 0.8);
    let omega = Vec3::new(0.7, -0.2, 0.4);
    let m = veselova_m_from_omega(&params, omega, gamma);
    let back = veselova_omega_from_m(&params, m, gamma);
    println!("omega -> M -> omega round trip error {:.1e}", (back - omega).max_abs());

    let traj = integrate_system(&sys, &StateTS2::new(m, gamma), &IntegratorConfig::default())?;
    let report = drift_report(&traj);
    for e in &report.entries {
        println!("{:>3}: relative drift {:.2e}", e.name, e.drift);
    }
    println!("largest drift {:.2e}", report.max_drift);
    Ok(())
}
