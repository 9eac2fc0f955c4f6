//! The gauge group acting on `(M, gamma)`.
//!
//! A transform `(alpha, c, h)` splits `M = M' + M''` with `M'' = (M, gamma) gamma`
//! and maps
//!
//! ```text
//! M~ = alpha(gamma) M' + c M'' + M'' x h(gamma),   gamma~ = gamma.
//! ```
//!
//! It sends the bracket `P_{g,f}` to `P_{g~,f~}` with `g~ = alpha g` and `f~`
//! given by [`pushforward_params`].

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::math::{
    self, constant, hat, sampling, zero_vector_field, Bivector6, Mat3, Scalar, ScalarFn, StateTS2, Vec3,
    Vector, VectorFn,
};
use crate::sphere::{k_from_gf, SFunctionSpec, SphereSystem};
use crate::tolerance::Tolerances;

const PROBES: usize = 200;

/// Gauge parameters: positive `alpha(gamma)`, nonzero constant `c`, vector
/// field `h(gamma)`.
#[derive(Clone)]
pub struct GaugeTransform {
    pub alpha: Scalar,
    pub c: f64,
    pub h: Vector,
}

impl std::fmt::Debug for GaugeTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaugeTransform").field("c", &self.c).finish_non_exhaustive()
    }
}

impl GaugeTransform {
    /// Validates `c != 0` and `alpha > 0` on a probe grid.
    pub fn new(alpha: Scalar, c: f64, h: Vector) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::Precondition(format!("gauge constant c = {c} must be finite and nonzero")));
        }
        for p in sampling::fibonacci_sphere(PROBES) {
            let a = alpha.value(p);
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Precondition(format!("gauge factor alpha = {a:e} is not positive at {p:?}")));
            }
        }
        Ok(GaugeTransform { alpha, c, h })
    }

    pub fn identity() -> Self {
        GaugeTransform {
            alpha: constant(1.0),
            c: 1.0,
            h: zero_vector_field(),
        }
    }

    /// `M~` for arbitrary `gamma`, with `M'' = (M, gamma) gamma` unnormalized.
    pub fn map_m(&self, m: Vec3, gamma: Vec3) -> Vec3 {
        let mpp = gamma * m.dot(gamma);
        let mp = m - mpp;
        mp * self.alpha.value(gamma) + mpp * self.c + mpp.cross(self.h.value(gamma))
    }

    /// `dM~/dM = alpha I + (c - alpha) gamma gamma^T + (gamma x h) gamma^T`.
    pub fn jacobian_m(&self, gamma: Vec3) -> Mat3 {
        let a = self.alpha.value(gamma);
        let gg = gamma.outer(gamma);
        Mat3::IDENTITY * a + gg * (self.c - a) + gamma.cross(self.h.value(gamma)).outer(gamma)
    }

    /// Full 6x6 Jacobian of `(M, gamma) -> (M~, gamma)`. Only `dh/dgamma` is
    /// taken by Richardson-extrapolated central differences, and it enters
    /// multiplied by `M''`, so the Jacobian is analytic on the zero level.
    pub fn jacobian(&self, x: &StateTS2) -> Result<[[f64; 6]; 6]> {
        let (m, gamma) = (x.m, x.gamma);
        let jm = self.jacobian_m(gamma);
        let a = self.alpha.value(gamma);
        let da = math::gradient(self.alpha.as_ref(), gamma)?;
        let hv = self.h.value(gamma);
        let mdotg = m.dot(gamma);
        let mpp = gamma * mdotg;
        // dM''/dgamma = gamma M^T + (M, gamma) I
        let dmpp = gamma.outer(m) + Mat3::IDENTITY * mdotg;
        let mut dg = (m - mpp).outer(da) + dmpp * (self.c - a) - hat(hv) * dmpp;
        if mpp != Vec3::ZERO {
            let dh = math::fd_jacobian(self.h.as_ref(), gamma, math::default_step(gamma));
            dg = dg + hat(mpp) * Mat3(dh);
        }
        let mut j = [[0.0; 6]; 6];
        for r in 0..3 {
            for c in 0..3 {
                j[r][c] = jm.0[r][c];
                j[r][c + 3] = dg.0[r][c];
            }
            j[r + 3][r + 3] = 1.0;
        }
        Ok(j)
    }
}

fn check_unit(gamma: Vec3) -> Result<()> {
    let tol = Tolerances::default().unit_gamma;
    if (gamma.norm_squared() - 1.0).abs() > tol {
        return Err(Error::Domain(format!("gamma must be a unit vector, |gamma|^2 = {}", gamma.norm_squared())));
    }
    Ok(())
}

/// Applies `t` to a state with unit `gamma`.
pub fn apply_gauge_state(t: &GaugeTransform, x: &StateTS2) -> Result<StateTS2> {
    check_unit(x.gamma)?;
    Ok(StateTS2::new(t.map_m(x.m, x.gamma), x.gamma))
}

/// `alpha * beta` with a product-rule gradient.
fn product(a: &Scalar, b: &Scalar) -> Scalar {
    let (a1, b1, a2, b2) = (a.clone(), b.clone(), a.clone(), b.clone());
    ScalarFn::new(move |p| a1.value(p) * b1.value(p))
        .with_gradient(move |p| {
            let da = math::gradient(a2.as_ref(), p).unwrap_or(Vec3::splat(f64::NAN));
            let db = math::gradient(b2.as_ref(), p).unwrap_or(Vec3::splat(f64::NAN));
            da * b2.value(p) + db * a2.value(p)
        })
        .shared()
}

fn reciprocal(a: &Scalar) -> Scalar {
    let (a1, a2) = (a.clone(), a.clone());
    ScalarFn::new(move |p| 1.0 / a1.value(p))
        .with_gradient(move |p| {
            let v = a2.value(p);
            math::gradient(a2.as_ref(), p).unwrap_or(Vec3::splat(f64::NAN)) * (-1.0 / (v * v))
        })
        .shared()
}

/// `phi h + s k` with `curl(phi h) = phi curl h + grad phi x h`.
fn combine(phi: Option<&Scalar>, h: &Vector, s: f64, k: &Vector) -> Vector {
    let (phi1, h1, k1) = (phi.cloned(), h.clone(), k.clone());
    let (phi2, h2, k2) = (phi.cloned(), h.clone(), k.clone());
    VectorFn::new(move |p| h1.value(p) * phi1.as_ref().map_or(1.0, |f| f.value(p)) + k1.value(p) * s)
        .with_curl(move |p| {
            let nan = Vec3::splat(f64::NAN);
            let ch = math::curl(h2.as_ref(), p).unwrap_or(nan);
            let ck = math::curl(k2.as_ref(), p).unwrap_or(nan);
            let first = match &phi2 {
                Some(f) => ch * f.value(p) + math::gradient(f.as_ref(), p).unwrap_or(nan).cross(h2.value(p)),
                None => ch,
            };
            first + ck * s
        })
        .shared()
}

/// `t2 . t1 = (alpha1 alpha2, c1 c2, alpha2 h1 + c1 h2)`: apply `t1`, then `t2`.
pub fn compose(t2: &GaugeTransform, t1: &GaugeTransform) -> GaugeTransform {
    GaugeTransform {
        alpha: product(&t1.alpha, &t2.alpha),
        c: t1.c * t2.c,
        h: combine(Some(&t2.alpha), &t1.h, t1.c, &t2.h),
    }
}

/// `(1/alpha, 1/c, -h/(alpha c))`
pub fn inverse(t: &GaugeTransform) -> GaugeTransform {
    let inv_alpha = reciprocal(&t.alpha);
    let zero = zero_vector_field();
    let scale: Scalar = {
        let (a, c) = (inv_alpha.clone(), -1.0 / t.c);
        let a2 = inv_alpha.clone();
        ScalarFn::new(move |p| a.value(p) * c)
            .with_gradient(move |p| math::gradient(a2.as_ref(), p).unwrap_or(Vec3::splat(f64::NAN)) * c)
            .shared()
    };
    GaugeTransform {
        alpha: inv_alpha,
        c: 1.0 / t.c,
        h: combine(Some(&scale), &t.h, 0.0, &zero),
    }
}

/// The pair `(g, f)` parametrizing the bracket `P_{g,f}`.
#[derive(Clone)]
pub struct GFParams {
    pub g: Scalar,
    pub f: Scalar,
}

impl std::fmt::Debug for GFParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("GFParams")
    }
}

impl GFParams {
    pub fn new(g: Scalar, f: Scalar) -> Result<Self> {
        for p in sampling::fibonacci_sphere(PROBES) {
            let v = g.value(p);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("g = {v:e} is not positive at {p:?}")));
            }
        }
        Ok(GFParams { g, f })
    }

    /// `(g, f)` of a system given in reduced form. The `Phi` term is a
    /// Casimir shift and does not enter the bracket.
    pub fn from_system(sys: &SphereSystem) -> Result<Self> {
        match &sys.s_spec {
            SFunctionSpec::Reduced { g, f, .. } => GFParams::new(g.clone(), f.clone()),
            SFunctionSpec::Direct { .. } => Err(Error::Unsupported(format!(
                "system '{}' has no (g, f) form; build it from a reduced specification",
                sys.name
            ))),
        }
    }

    /// `(1, 0)`, the parameters of the `e(3)` bracket.
    pub fn trivial() -> Self {
        GFParams {
            g: constant(1.0),
            f: constant(0.0),
        }
    }
}

/// Parameters of the pushed-forward bracket:
///
/// ```text
/// g~ = alpha g
/// f~ = (alpha^2/c) f + (alpha/c - 1)(g~ - (gamma, grad g~))
///      + (1/c)(gamma, g~ grad alpha + g~^2 curl(h/g~))
/// ```
pub fn pushforward_params(t: &GaugeTransform, p: &GFParams) -> Result<GFParams> {
    if t.c == 0.0 || !t.c.is_finite() {
        return Err(Error::Precondition(format!("gauge constant c = {} must be finite and nonzero", t.c)));
    }
    let g_tilde = product(&t.alpha, &p.g);
    let (alpha, h, f, gt, c) = (t.alpha.clone(), t.h.clone(), p.f.clone(), g_tilde.clone(), t.c);
    let f_tilde = ScalarFn::new(move |gamma| {
        let nan = Vec3::splat(f64::NAN);
        let a = alpha.value(gamma);
        let da = math::gradient(alpha.as_ref(), gamma).unwrap_or(nan);
        let gv = gt.value(gamma);
        let dg = math::gradient(gt.as_ref(), gamma).unwrap_or(nan);
        let hv = h.value(gamma);
        let curl_h = math::curl(h.as_ref(), gamma).unwrap_or(nan);
        // curl(h/g~) = curl h / g~ - grad g~ x h / g~^2
        let curl_hg = curl_h / gv - dg.cross(hv) / (gv * gv);
        a * a / c * f.value(gamma)
            + (a / c - 1.0) * (gv - gamma.dot(dg))
            + gamma.dot(da * gv + curl_hg * (gv * gv)) / c
    })
    .shared();
    Ok(GFParams { g: g_tilde, f: f_tilde })
}

/// `P_{g,f}` at `x`: `g [[hat M, hat gamma], [hat gamma, 0]] - g S [[hat gamma, 0], [0, 0]]`
/// with `S = (f gamma - grad g, M)/g`.
pub fn p_gf(p: &GFParams, x: &StateTS2) -> Result<Bivector6> {
    let g = p.g.value(x.gamma);
    let s = k_from_gf(p.g.as_ref(), p.f.as_ref(), x.gamma)?.dot(x.m);
    let gh = hat(x.gamma);
    Ok(Bivector6::from_blocks(hat(x.m) * g - gh * (g * s), gh * g, Mat3::ZERO))
}

/// `J P J^T` at `x`, where `J` is the Jacobian of the gauge map at `x`.
/// The result is the pushed-forward bivector at the image point.
pub fn pushforward_bivector(
    t: &GaugeTransform,
    bivector: impl Fn(&StateTS2) -> Result<Bivector6>,
    x: &StateTS2,
) -> Result<Bivector6> {
    let a = t.alpha.value(x.gamma);
    if !(a > 0.0) || t.c == 0.0 {
        return Err(Error::Precondition(format!("singular gauge Jacobian (alpha = {a:e}, c = {})", t.c)));
    }
    Ok(bivector(x)?.congruence(&t.jacobian(x)?))
}

fn check_zero_level(x: &StateTS2) -> Result<()> {
    check_unit(x.gamma)?;
    let casimir = x.m.dot(x.gamma);
    if casimir.abs() > Tolerances::default().zero_level {
        return Err(Error::Precondition(format!("state is off the zero level: (M, gamma) = {casimir:e}")));
    }
    Ok(())
}

/// `(M, gamma) -> (M/g, gamma)` on the level `(M, gamma) = 0`.
pub fn zero_level_reduce(g: &Scalar, x: &StateTS2) -> Result<StateTS2> {
    check_zero_level(x)?;
    let gv = g.value(x.gamma);
    if !(gv > 0.0 && gv.is_finite()) {
        return Err(Error::Domain(format!("g = {gv:e} is not positive at {:?}", x.gamma)));
    }
    Ok(StateTS2::new(x.m / gv, x.gamma))
}

/// Congruence of `bivector` under the zero-level map; the Jacobian is
/// analytic: `dM~/dM = I/g`, `dM~/dgamma = -M grad g^T / g^2`.
pub fn zero_level_bivector(
    g: &Scalar,
    bivector: impl Fn(&StateTS2) -> Result<Bivector6>,
    x: &StateTS2,
) -> Result<Bivector6> {
    check_zero_level(x)?;
    let gv = g.value(x.gamma);
    let dg = math::gradient(g.as_ref(), x.gamma)?;
    let dm = x.m.outer(dg) * (-1.0 / (gv * gv));
    let mut j = [[0.0; 6]; 6];
    for r in 0..3 {
        j[r][r] = 1.0 / gv;
        j[r + 3][r + 3] = 1.0;
        for c in 0..3 {
            j[r][c + 3] = dm.0[r][c];
        }
    }
    Ok(bivector(x)?.congruence(&j))
}

/// Constant gauge `(a, c, h0)`: the Jacobian is constant in `M`.
pub fn constant_gauge(a: f64, c: f64, h0: Vec3) -> Result<GaugeTransform> {
    GaugeTransform::new(constant(a), c, Arc::new(math::ConstantVector(h0)))
}
