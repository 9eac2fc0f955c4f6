//! Builds the gauge sending the ball's bracket to the `e(3)` bracket and shows
//! how the result improves with the spherical-harmonic band limit.

use nonholo::gauge::{reduction_report, GFParams, ReportProbes};
use nonholo::models::{ball_system, BallParams};

fn main() -> nonholo::Result<()> {
    let sys = ball_system(&BallParams::default())?;
    let params = GFParams::from_system(&sys)?;
    println!("{:>3} {:>10} {:>10} {:>10} {:>10} {:>10}", "L", "c", "residual", "g~ - 1", "f~", "bracket");
    for l in [4, 8, 16, 32] {
        let (red, r) = reduction_report(&params, l, ReportProbes::default())?;
        println!(
            "{l:>3} {:>10.6} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}",
            r.c, r.residual, r.g_tilde_dev, r.f_tilde_dev, r.bracket_dev
        );
        if let Some(w) = red.solution.warning {
            println!("    {w}");
        }
    }
    Ok(())
}
