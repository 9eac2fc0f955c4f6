//! Invariant-measure and conformal-Hamiltonian residuals for the ball, the
//! Veselova system and their gyrostatic variants.

use nonholo::models::{ball_system, veselova_system, BallParams, VeselovaParams};
use nonholo::verify::{conformal_suite, measure_suite};

fn main() -> nonholo::Result<()> {
    let k = [0.0, 0.0, 0.1];
    let systems = [
        ball_system(&BallParams::default())?,
        ball_system(&BallParams { k, ..BallParams::default() })?,
        veselova_system(&VeselovaParams::default())?,
        veselova_system(&VeselovaParams { k, ..VeselovaParams::default() })?,
    ];
    println!("{:<18} {:>12} {:>12}", "system", "measure", "conformal");
    for sys in &systems {
        let m = measure_suite(sys, 1000, 0)?.metrics[0].value;
        let c = conformal_suite(sys, 1000, 0)?.metrics[0].value;
        println!("{:<18} {m:>12.2e} {c:>12.2e}", sys.name);
    }
    Ok(())
}
