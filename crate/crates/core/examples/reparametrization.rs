//! Integrates in the new time `tau` with `dt = g dtau`, maps back to physical
//! time and compares with a direct run on t in [0, 10].

use nonholo::math::{StateTS2, Vec3};
use nonholo::models::{ball_system, veselova_system, BallParams, VeselovaParams};
use nonholo::sim::{reparametrization_deviation, IntegratorConfig};

fn main() -> nonholo::Result<()> {
    let x0 = StateTS2::new(Vec3::new(0.3, -0.5, 0.8), Vec3::new(0.0, 0.6, 0.8));
    for sys in [ball_system(&BallParams::default())?, veselova_system(&VeselovaParams::default())?] {
        let dev = reparametrization_deviation(&sys, &x0, 10.0, &IntegratorConfig::default())?;
        println!("{:<10} sup-norm deviation {dev:.2e}", sys.name);
    }
    Ok(())
}
