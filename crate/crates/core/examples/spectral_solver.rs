//! Sphere quadrature, spherical-harmonic analysis and the curl equation
//! `(gamma, curl h) = F + c` for a user-supplied right side.

use std::f64::consts::PI;

use nonholo::gauge::{solve_curl_equation, sphere_quadrature, SphereSpectralField};
use nonholo::math::{constant, sampling::fibonacci_sphere, ScalarField, ScalarFn, Vec3};

fn main() -> nonholo::Result<()> {
    let area = sphere_quadrature(constant(1.0).as_ref())?;
    let second = sphere_quadrature(&ScalarFn::new(|p: Vec3| p.z * p.z))?;
    println!("area {:.1e} off 4 pi, second moment {:.1e} off 4 pi / 3", area - 4.0 * PI, second - 4.0 * PI / 3.0);

    let f = ScalarFn::new(|p: Vec3| p.x * p.y * p.z + 0.5 * p.z * p.z - 0.1 * p.x);
    let coeffs = SphereSpectralField::from_field(&f, 12)?;
    let err = fibonacci_sphere(500).into_iter().fold(0.0f64, |m, p| m.max((coeffs.eval(p) - f.value(p)).abs()));
    println!("round trip at L = 12: {err:.1e}");

    let sol = solve_curl_equation(&f, 16)?;
    println!("curl equation: c = {:.6}, residual {:.1e}", sol.c, sol.residual);
    Ok(())
}
