//! A two-degree-of-freedom Chaplygin system with density `N = exp(q1)`:
//! conformal representation, energy conservation and the measure gate.

use nonholo::planar::{demo_system, inadmissible_demo_system, to_conformal};
use nonholo::sim::{integrate_planar, IntegratorConfig};
use nonholo::tolerance::Tolerances;
use nonholo::verify::planar_demo_state;

fn main() -> nonholo::Result<()> {
    let sys = demo_system();
    let s0 = planar_demo_state();
    let gate = Tolerances::default().planar_measure_gate;

    let c = to_conformal(&sys, &s0, gate)?;
    println!("p = N P = {:?}, {{p1, p2}} = {:.6}, residual {:.1e}", c.p, c.bracket_p1p2, c.residual);

    let traj = integrate_planar(&sys, &s0, &IntegratorConfig::default())?;
    println!("energy drift over t in [0, 100]: {:.2e}", traj.energy_drift());

    match to_conformal(&inadmissible_demo_system(), &s0, gate) {
        Err(e) => println!("inadmissible system refused: {e}"),
        Ok(_) => println!("unexpected: inadmissible system accepted"),
    }
    Ok(())
}
