//! On the level `(M, gamma) = 0` the rescaling `M -> M/g` alone turns the
//! bracket into the `e(3)` bracket.

use nonholo::models::{ball_system, veselova_system, BallParams, VeselovaParams};
use nonholo::verify::zero_level_suite;

fn main() -> nonholo::Result<()> {
    for sys in [ball_system(&BallParams::default())?, veselova_system(&VeselovaParams::default())?] {
        let r = zero_level_suite(&sys, 200, 0)?;
        println!("{:<10} max entrywise deviation {:.2e}", sys.name, r.metrics[0].value);
    }
    Ok(())
}
