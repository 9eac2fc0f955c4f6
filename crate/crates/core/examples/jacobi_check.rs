//! Finite-difference Jacobi identity for the brackets of both models, and the
//! mismatched-measure control that must fail it.

use nonholo::models::{ball_system, veselova_system, BallParams, VeselovaParams};
use nonholo::verify::{jacobi_suite, negative_control_suite};

fn main() -> nonholo::Result<()> {
    let n = 1000;
    for sys in [ball_system(&BallParams::default())?, veselova_system(&VeselovaParams::default())?] {
        let r = jacobi_suite(&sys, n, 0)?;
        println!("{:<10} max Jacobiator {:.2e} over {n} states", sys.name, r.metrics[0].value);
    }
    let control = negative_control_suite(n, 0)?;
    println!("control (rho = 1 with the ball's K):");
    for m in &control.metrics {
        println!("    {:<28} {:.3}", m.name, m.value);
    }
    Ok(())
}
