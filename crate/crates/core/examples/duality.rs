//! Maps a Veselova system to its dual Chaplygin ball and checks the
//! Hamiltonian identity and the relation between the two `g` functions.

use nonholo::models::{duality_map, Potential, VeselovaParams};
use nonholo::math::Vec3;
use nonholo::verify::duality_suite;

fn main() -> nonholo::Result<()> {
    let ves = VeselovaParams {
        potential: Potential::linear(Vec3::new(0.2, -0.1, 0.5)),
        ..VeselovaParams::default()
    };
    for d in [0.5, 1.0, 2.0] {
        let ball = duality_map(&ves, d)?;
        let report = duality_suite(&ves, d, 1000, 0)?;
        println!("D = {d}: ball A = {:?}, potential {:?}", ball.a, ball.potential);
        for m in &report.metrics {
            println!("    {:<26} {:.2e} (bound {:.0e})", m.name, m.value, m.threshold);
        }
    }
    match duality_map(&VeselovaParams { ahat: [1.0, 0.75, 0.9], ..ves.clone() }, 1.0) {
        Err(e) => println!("Ahat with an entry 1 is refused: {e}"),
        Ok(_) => println!("unexpected: degenerate ball accepted"),
    }
    Ok(())
}
