//! Spectral solution of `(gamma, curl h) = F(gamma) + c` on the unit sphere.
//!
//! `c` is fixed by solvability (the right side must have zero mean). Writing
//! `h = eps * gamma x grad_S psi` turns the equation into `Lap_S psi = F + c`,
//! which is diagonal in spherical harmonics. The orientation sign `eps` is
//! calibrated numerically on `F = gamma_3`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::spectral::{SphereGrid, SphereSpectralField};
use super::transform::GFParams;
use crate::error::{Error, Result};
use crate::math::{self, sampling, Scalar, ScalarField, ScalarFn, Vec3, Vector, VectorField3};
use crate::tolerance::Tolerances;

pub const DEFAULT_BAND_LIMIT: usize = 32;
const RESIDUAL_PROBES: usize = 500;

/// Right side of the curl equation for the reduction of `P_{g,f}` to `e(3)`:
/// with `alpha = 1/g`, `F = -(alpha^2 f + alpha + (gamma, grad alpha))`.
pub fn curl_target_f(p: &GFParams) -> Scalar {
    let (g, f) = (p.g.clone(), p.f.clone());
    ScalarFn::new(move |gamma| {
        let gv = g.value(gamma);
        let dg = math::gradient(g.as_ref(), gamma).unwrap_or(Vec3::splat(f64::NAN));
        let alpha = 1.0 / gv;
        let dalpha = dg * (-1.0 / (gv * gv));
        -(alpha * alpha * f.value(gamma) + alpha + gamma.dot(dalpha))
    })
    .shared()
}

/// `h` together with the spectral data it was synthesized from.
#[derive(Clone, Debug)]
pub struct SpectralCurlField {
    /// Coefficients of the components of `gamma x grad psi`.
    pub rotated: [SphereSpectralField; 3],
    /// Coefficients of `Lap_S psi`.
    pub laplacian: SphereSpectralField,
    pub sign: f64,
}

impl SpectralCurlField {
    fn rotated_at(&self, unit: Vec3) -> Vec3 {
        Vec3::new(self.rotated[0].eval(unit), self.rotated[1].eval(unit), self.rotated[2].eval(unit))
    }
}

impl VectorField3 for SpectralCurlField {
    /// Extended off the sphere as a degree-zero homogeneous field.
    fn value(&self, p: Vec3) -> Vec3 {
        self.rotated_at(p.normalized()) * self.sign
    }

    /// `curl(gamma x grad psi) = (gamma Lap_S psi - grad_S psi) / |p|`, and
    /// `grad_S psi = -gamma x (gamma x grad psi)`.
    fn curl(&self, p: Vec3) -> Option<Vec3> {
        let r = p.norm();
        let unit = p / r;
        let rot = self.rotated_at(unit);
        Some((unit * self.laplacian.eval(unit) + unit.cross(rot)) * (self.sign / r))
    }
}

#[derive(Clone)]
pub struct CurlSolution {
    pub c: f64,
    pub h: Vector,
    pub field: SpectralCurlField,
    pub psi: SphereSpectralField,
    pub band_limit: usize,
    /// `max |(gamma, curl h) - F - c|` over probe points, curl by finite differences.
    pub residual: f64,
    /// Set when the residual exceeds the default tolerance.
    pub warning: Option<String>,
}

impl std::fmt::Debug for CurlSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurlSolution")
            .field("c", &self.c)
            .field("band_limit", &self.band_limit)
            .field("residual", &self.residual)
            .field("warning", &self.warning)
            .finish_non_exhaustive()
    }
}

fn solve_with_sign(f: &dyn ScalarField, band_limit: usize, sign: f64) -> Result<CurlSolution> {
    if band_limit == 0 {
        return Err(Error::Config("band limit must be at least 1".into()));
    }
    let grid = SphereGrid::new(band_limit);
    let samples = grid.sample(f)?;
    let c = -grid.integrate(&samples) / (4.0 * PI);
    let coeffs = SphereSpectralField::analyze(&grid, &samples);
    // Coefficients at the level of analysis rounding carry no information and
    // would be amplified by finite-difference checks.
    let floor = 64.0 * f64::EPSILON * samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let psi = coeffs.map_coeffs(|l, _, a| {
        if l == 0 || a.norm() <= floor {
            Complex64::new(0.0, 0.0)
        } else {
            a / -((l * (l + 1)) as f64)
        }
    });
    let field = SpectralCurlField {
        rotated: psi.rotated_gradient(),
        laplacian: psi.laplacian(),
        sign,
    };
    let h: Vector = std::sync::Arc::new(field.clone());
    let residual = fd_residual(&field, f, c)?;
    let tol = Tolerances::default().curl_residual;
    let warning = (residual > tol).then(|| {
        format!(
            "curl-equation residual {residual:e} exceeds {tol:e} at band limit {band_limit}; try a larger band limit such as {}",
            2 * band_limit
        )
    });
    Ok(CurlSolution {
        c,
        h,
        field,
        psi,
        band_limit,
        residual,
        warning,
    })
}

/// `max |(gamma, curl h) - F - c|` over a Fibonacci grid, with `curl h` by
/// central differences.
pub fn fd_residual(h: &dyn VectorField3, f: &dyn ScalarField, c: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in sampling::fibonacci_sphere(RESIDUAL_PROBES) {
        let curl = math::fd_curl(h, p, math::default_step(p))?;
        worst = worst.max((p.dot(curl) - f.value(p) - c).abs());
    }
    Ok(worst)
}

/// Orientation sign of `h = eps * gamma x grad_S psi`, fixed once by solving
/// the case `F = gamma_3` with both signs.
pub fn calibrated_sign() -> f64 {
    static SIGN: OnceLock<f64> = OnceLock::new();
    *SIGN.get_or_init(|| {
        let f = ScalarFn::new(|p: Vec3| p.z);
        let plus = solve_with_sign(&f, 4, 1.0).map(|s| s.residual).unwrap_or(f64::INFINITY);
        let minus = solve_with_sign(&f, 4, -1.0).map(|s| s.residual).unwrap_or(f64::INFINITY);
        if plus <= minus {
            1.0
        } else {
            -1.0
        }
    })
}

/// Solves the curl equation for band limit `band_limit`. A residual above the
/// default tolerance is reported through `warning`, not as an error.
pub fn solve_curl_equation(f: &dyn ScalarField, band_limit: usize) -> Result<CurlSolution> {
    solve_with_sign(f, band_limit, calibrated_sign())
}
