//! Spherical harmonics on the unit sphere.
//!
//! Complex orthonormal harmonics with the Condon-Shortley phase, sampled on a
//! Gauss-Legendre grid in `cos(theta)` times a uniform grid in longitude. The
//! grid for band limit `L` has `2(L+1)` latitudes and `2L+1` longitudes, which
//! makes analysis exact for fields of degree at most `L`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{ScalarField, Vec3};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Orthonormal associated Legendre functions `Pbar_l^m(x)` for `0 <= m <= l <= lmax`,
/// including the Condon-Shortley phase, stored at `l(l+1)/2 + m`.
fn normalized_legendre(lmax: usize, x: f64, out: &mut [f64]) {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    out[0] = 0.5 / PI.sqrt();
    for m in 1..=lmax {
        let mf = m as f64;
        out[idx(m, m)] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * out[idx(m - 1, m - 1)];
    }
    for m in 0..lmax {
        out[idx(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * out[idx(m, m)];
    }
    for m in 0..=lmax {
        let mf = m as f64;
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            out[idx(l, m)] = a * (x * out[idx(l - 1, m)] - b * out[idx(l - 2, m)]);
        }
    }
}

/// Colatitude/longitude sampling grid for band limit `L`.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    pub band_limit: usize,
    /// `cos(theta)` at each latitude.
    pub cos_theta: Vec<f64>,
    pub weights: Vec<f64>,
    pub n_lon: usize,
}

impl SphereGrid {
    pub fn new(band_limit: usize) -> Self {
        let (cos_theta, weights) = gauss_legendre(2 * (band_limit + 1));
        SphereGrid {
            band_limit,
            cos_theta,
            weights,
            n_lon: 2 * band_limit + 1,
        }
    }

    pub fn n_lat(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn longitude(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_lon as f64
    }

    pub fn point(&self, i: usize, j: usize) -> Vec3 {
        let z = self.cos_theta[i];
        let s = (1.0 - z * z).sqrt();
        let phi = self.longitude(j);
        Vec3::new(s * phi.cos(), s * phi.sin(), z)
    }

    /// All grid points, latitude-major.
    pub fn points(&self) -> Vec<Vec3> {
        (0..self.n_lat()).flat_map(|i| (0..self.n_lon).map(move |j| (i, j))).map(|(i, j)| self.point(i, j)).collect()
    }

    /// Quadrature weight of every point, in [`points`](Self::points) order.
    pub fn point_weights(&self) -> Vec<f64> {
        let dphi = 2.0 * PI / self.n_lon as f64;
        self.weights.iter().flat_map(|w| std::iter::repeat(w * dphi).take(self.n_lon)).collect()
    }

    /// Samples `field` on the grid; errors on non-finite values.
    pub fn sample(&self, field: &dyn ScalarField) -> Result<Vec<f64>> {
        self.points()
            .into_iter()
            .map(|p| {
                let v = field.value(p);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite {
                        what: format!("field on quadrature grid at {p:?}"),
                    })
                }
            })
            .collect()
    }

    /// `int f dsigma` from grid samples, summed in a fixed order.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples.iter().zip(self.point_weights()).map(|(f, w)| f * w).sum()
    }
}

/// Default quadrature band limit.
pub const DEFAULT_QUADRATURE_L: usize = 32;

/// `int_{S^2} f dsigma`; exact for polynomial integrands of degree up to
/// `4L + 3` in `cos(theta)` and `2L` in longitude.
pub fn sphere_quadrature(field: &dyn ScalarField) -> Result<f64> {
    sphere_quadrature_with(field, DEFAULT_QUADRATURE_L)
}

pub fn sphere_quadrature_with(field: &dyn ScalarField, band_limit: usize) -> Result<f64> {
    let grid = SphereGrid::new(band_limit);
    Ok(grid.integrate(&grid.sample(field)?))
}

/// Coefficients `a_lm`, `0 <= l <= L`, `-l <= m <= l`, stored at `l^2 + l + m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereSpectralField {
    pub band_limit: usize,
    pub coeffs: Vec<Complex64>,
}

impl SphereSpectralField {
    pub fn zeros(band_limit: usize) -> Self {
        SphereSpectralField {
            band_limit,
            coeffs: vec![Complex64::new(0.0, 0.0); (band_limit + 1) * (band_limit + 1)],
        }
    }

    #[inline]
    pub fn index(l: usize, m: i64) -> usize {
        ((l * l + l) as i64 + m) as usize
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        if l > self.band_limit || m.unsigned_abs() as usize > l {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[Self::index(l, m)]
        }
    }

    pub fn set(&mut self, l: usize, m: i64, v: Complex64) {
        self.coeffs[Self::index(l, m)] = v;
    }

    /// Analysis of a real field sampled on `grid` (latitude-major samples).
    pub fn analyze(grid: &SphereGrid, samples: &[f64]) -> Self {
        let lmax = grid.band_limit;
        let mut out = Self::zeros(lmax);
        let mut plm = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
        let dphi = 2.0 * PI / grid.n_lon as f64;
        for i in 0..grid.n_lat() {
            normalized_legendre(lmax, grid.cos_theta[i], &mut plm);
            let row = &samples[i * grid.n_lon..(i + 1) * grid.n_lon];
            for m in 0..=lmax {
                // int f e^{-i m phi} dphi on this latitude
                let mut fm = Complex64::new(0.0, 0.0);
                for (j, f) in row.iter().enumerate() {
                    fm += Complex64::from_polar(*f, -(m as f64) * grid.longitude(j));
                }
                fm *= dphi * grid.weights[i];
                for l in m..=lmax {
                    let k = Self::index(l, m as i64);
                    out.coeffs[k] += fm * plm[l * (l + 1) / 2 + m];
                }
            }
        }
        // Real field: a_{l,-m} = (-1)^m conj(a_{lm}).
        for l in 0..=lmax {
            for m in 1..=l {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let v = out.get(l, m as i64).conj() * sign;
                out.set(l, -(m as i64), v);
            }
        }
        out
    }

    /// Samples `field` on a grid for `band_limit` and analyzes it.
    pub fn from_field(field: &dyn ScalarField, band_limit: usize) -> Result<Self> {
        let grid = SphereGrid::new(band_limit);
        Ok(Self::analyze(&grid, &grid.sample(field)?))
    }

    /// `sum a_lm Y_lm(p/|p|)`, complex.
    pub fn eval_complex(&self, p: Vec3) -> Complex64 {
        let lmax = self.band_limit;
        let r = p.norm();
        let (x, y, z) = (p.x / r, p.y / r, p.z / r);
        let mut plm = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
        normalized_legendre(lmax, z.clamp(-1.0, 1.0), &mut plm);
        let rho = x.hypot(y);
        // e^{i phi}; the value at the poles is irrelevant since Pbar_l^m vanishes there for m > 0.
        let eiphi = if rho > 0.0 { Complex64::new(x / rho, y / rho) } else { Complex64::new(1.0, 0.0) };
        let mut total = Complex64::new(0.0, 0.0);
        let mut em = Complex64::new(1.0, 0.0);
        for m in 0..=lmax {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for l in m..=lmax {
                let ylm = em * plm[l * (l + 1) / 2 + m];
                total += self.get(l, m as i64) * ylm;
                if m > 0 {
                    total += self.get(l, -(m as i64)) * ylm.conj() * sign;
                }
            }
            em *= eiphi;
        }
        total
    }

    /// Real part of the synthesis at `p/|p|`.
    pub fn eval(&self, p: Vec3) -> f64 {
        self.eval_complex(p).re
    }

    pub fn map_coeffs(&self, f: impl Fn(usize, i64, Complex64) -> Complex64) -> Self {
        let mut out = Self::zeros(self.band_limit);
        for l in 0..=self.band_limit {
            for m in -(l as i64)..=(l as i64) {
                out.set(l, m, f(l, m, self.get(l, m)));
            }
        }
        out
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        self.map_coeffs(|_, _, a| a * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.map_coeffs(|l, m, a| a + other.get(l, m))
    }

    /// Surface Laplacian: multiplies degree `l` by `-l(l+1)`.
    pub fn laplacian(&self) -> Self {
        self.map_coeffs(|l, _, a| a * -((l * (l + 1)) as f64))
    }

    /// `L_+`, with `L_+ Y_lm = sqrt((l-m)(l+m+1)) Y_{l,m+1}`.
    pub fn l_plus(&self) -> Self {
        self.map_coeffs(|l, m, _| {
            let (lf, mf) = (l as f64, m as f64);
            self.get(l, m - 1) * ((lf - mf + 1.0) * (lf + mf)).max(0.0).sqrt()
        })
    }

    /// `L_-`, with `L_- Y_lm = sqrt((l+m)(l-m+1)) Y_{l,m-1}`.
    pub fn l_minus(&self) -> Self {
        self.map_coeffs(|l, m, _| {
            let (lf, mf) = (l as f64, m as f64);
            self.get(l, m + 1) * ((lf + mf + 1.0) * (lf - mf)).max(0.0).sqrt()
        })
    }

    pub fn l_z(&self) -> Self {
        self.map_coeffs(|_, m, a| a * m as f64)
    }

    /// Coefficient sets of the three components of `r x grad(psi)` for the
    /// degree-zero extension of `psi`, using `r x grad = i L`.
    pub fn rotated_gradient(&self) -> [Self; 3] {
        let (lp, lm) = (self.l_plus(), self.l_minus());
        let i = Complex64::new(0.0, 1.0);
        [
            lp.add(&lm).scaled(i * 0.5),
            lp.add(&lm.scaled(Complex64::new(-1.0, 0.0))).scaled(Complex64::new(0.5, 0.0)),
            self.l_z().scaled(i),
        ]
    }
}
