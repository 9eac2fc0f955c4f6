//! Gauge transforms: composition, inverses, and the action on the bracket
//! parameters `(g, f)`.

use nonholo::gauge::{apply_gauge_state, compose, inverse, pushforward_params};
use nonholo::math::{StateTS2, Vec3};
use nonholo::verify::{demo_gf_params, demo_transforms, gauge_suite};

fn main() -> nonholo::Result<()> {
    let (t1, t2) = demo_transforms()?;
    let x = StateTS2::new(Vec3::new(0.4, -1.0, 0.3), Vec3::new(0.0, 0.6, 0.8));

    let y = apply_gauge_state(&t1, &x)?;
    println!("M = {:?}\nt1 M = {:?}", x.m, y.m);
    println!("Casimir scales by c: {:.15} vs {:.15}", y.m.dot(y.gamma), t1.c * x.m.dot(x.gamma));

    let back = apply_gauge_state(&inverse(&t1), &y)?;
    println!("inverse round trip error {:.1e}", (back.m - x.m).max_abs());

    let p = demo_gf_params()?;
    let q = pushforward_params(&compose(&t2, &t1), &p)?;
    println!("g~ = {:.6}, f~ = {:.6} at gamma = {:?}", q.g.value(x.gamma), q.f.value(x.gamma), x.gamma);

    for m in gauge_suite(200, 0)?.metrics {
        println!("{:<22} {:.2e} (bound {:.0e})", m.name, m.value, m.threshold);
    }
    Ok(())
}
