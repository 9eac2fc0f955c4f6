//! Integrates the Chaplygin ball over t in [0, 100] and reports the drift of
//! every first integral. Pass a path to also write the trajectory as CSV.

use nonholo::math::{StateTS2, Vec3};
use nonholo::models::{ball_system, BallParams};
use nonholo::sim::{drift_report, integrate_system, write_csv, IntegratorConfig};

fn main() -> nonholo::Result<()> {
    let sys = ball_system(&BallParams::default())?;
    let x0 = StateTS2::new(Vec3::new(0.3, -0.5, 0.8), Vec3::new(0.0, 0.6, 0.8));
    let traj = integrate_system(&sys, &x0, &IntegratorConfig::default())?;

    println!("{} steps accepted, {} rejected", traj.stats.accepted, traj.stats.rejected);
    for e in drift_report(&traj).entries {
        println!("{:>3}: initial {:+.12}  relative drift {:.2e}", e.name, e.initial, e.drift);
    }
    if let Some(path) = std::env::args().nth(1) {
        write_csv(&traj, std::fs::File::create(&path)?)?;
        println!("trajectory written to {path}");
    }
    Ok(())
}
