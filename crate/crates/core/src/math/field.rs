//! Scalar and vector fields of the direction vector `gamma`, with optional
//! analytic derivatives and finite-difference fallbacks.

use std::fmt;
use std::sync::Arc;

use super::linalg::Vec3;
use crate::error::{Error, Result};
use crate::tolerance::FD_STEP;

/// A real function of `gamma`.
pub trait ScalarField: Send + Sync {
    fn value(&self, g: Vec3) -> f64;

    /// Analytic gradient, when known.
    fn gradient(&self, _g: Vec3) -> Option<Vec3> {
        None
    }
}

/// A vector-valued function of `gamma`.
pub trait VectorField3: Send + Sync {
    fn value(&self, g: Vec3) -> Vec3;

    /// Analytic curl, when known.
    fn curl(&self, _g: Vec3) -> Option<Vec3> {
        None
    }
}

pub type Scalar = Arc<dyn ScalarField>;
pub type Vector = Arc<dyn VectorField3>;

type ValueFn = Arc<dyn Fn(Vec3) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(Vec3) -> Vec3 + Send + Sync>;

/// Closure-backed scalar field.
#[derive(Clone)]
pub struct ScalarFn {
    value: ValueFn,
    gradient: Option<GradFn>,
}

impl ScalarFn {
    pub fn new(value: impl Fn(Vec3) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn {
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(mut self, grad: impl Fn(Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(grad));
        self
    }

    pub fn shared(self) -> Scalar {
        Arc::new(self)
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn")
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl ScalarField for ScalarFn {
    fn value(&self, g: Vec3) -> f64 {
        (self.value)(g)
    }

    fn gradient(&self, g: Vec3) -> Option<Vec3> {
        self.gradient.as_ref().map(|d| d(g))
    }
}

/// Constant scalar field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant(pub f64);

impl ScalarField for Constant {
    fn value(&self, _g: Vec3) -> f64 {
        self.0
    }

    fn gradient(&self, _g: Vec3) -> Option<Vec3> {
        Some(Vec3::ZERO)
    }
}

pub fn constant(c: f64) -> Scalar {
    Arc::new(Constant(c))
}

/// Hides the analytic gradient of a field so every consumer falls back to
/// finite differences.
pub struct FdOnly(pub Scalar);

impl ScalarField for FdOnly {
    fn value(&self, g: Vec3) -> f64 {
        self.0.value(g)
    }
}

type VecFn = Arc<dyn Fn(Vec3) -> Vec3 + Send + Sync>;

/// Closure-backed vector field.
#[derive(Clone)]
pub struct VectorFn {
    value: VecFn,
    curl: Option<VecFn>,
}

impl VectorFn {
    pub fn new(value: impl Fn(Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        VectorFn {
            value: Arc::new(value),
            curl: None,
        }
    }

    pub fn with_curl(mut self, curl: impl Fn(Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        self.curl = Some(Arc::new(curl));
        self
    }

    pub fn shared(self) -> Vector {
        Arc::new(self)
    }
}

impl VectorField3 for VectorFn {
    fn value(&self, g: Vec3) -> Vec3 {
        (self.value)(g)
    }

    fn curl(&self, g: Vec3) -> Option<Vec3> {
        self.curl.as_ref().map(|c| c(g))
    }
}

/// Constant vector field (zero curl).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantVector(pub Vec3);

impl VectorField3 for ConstantVector {
    fn value(&self, _g: Vec3) -> Vec3 {
        self.0
    }

    fn curl(&self, _g: Vec3) -> Option<Vec3> {
        Some(Vec3::ZERO)
    }
}

pub fn zero_vector_field() -> Vector {
    Arc::new(ConstantVector(Vec3::ZERO))
}

/// Default finite-difference step at `point`.
pub fn default_step(point: Vec3) -> f64 {
    FD_STEP * point.norm().max(1.0)
}

/// Central difference with one Richardson level: O(step^4).
pub(crate) fn richardson<T, F>(f: F, step: f64) -> T
where
    F: Fn(f64) -> T,
    T: Richardson,
{
    let d = |h: f64| T::scaled_diff(f(h), f(-h), 0.5 / h);
    let coarse = d(step);
    let fine = d(0.5 * step);
    T::extrapolate(fine, coarse)
}

pub(crate) trait Richardson: Sized {
    fn scaled_diff(plus: Self, minus: Self, scale: f64) -> Self;
    /// `(4 fine - coarse) / 3`
    fn extrapolate(fine: Self, coarse: Self) -> Self;
}

impl Richardson for f64 {
    fn scaled_diff(plus: f64, minus: f64, scale: f64) -> f64 {
        (plus - minus) * scale
    }
    fn extrapolate(fine: f64, coarse: f64) -> f64 {
        (4.0 * fine - coarse) / 3.0
    }
}

impl Richardson for Vec3 {
    fn scaled_diff(plus: Vec3, minus: Vec3, scale: f64) -> Vec3 {
        (plus - minus) * scale
    }
    fn extrapolate(fine: Vec3, coarse: Vec3) -> Vec3 {
        (fine * 4.0 - coarse) / 3.0
    }
}

impl<const N: usize> Richardson for [f64; N] {
    fn scaled_diff(plus: Self, minus: Self, scale: f64) -> Self {
        std::array::from_fn(|i| (plus[i] - minus[i]) * scale)
    }
    fn extrapolate(fine: Self, coarse: Self) -> Self {
        std::array::from_fn(|i| (4.0 * fine[i] - coarse[i]) / 3.0)
    }
}

/// Central-difference gradient of `field` at `point`, Richardson-extrapolated.
pub fn fd_gradient(field: &dyn ScalarField, point: Vec3, step: f64) -> Result<Vec3> {
    if !(step > 0.0) {
        return Err(Error::Precondition(format!("finite-difference step must be positive, got {step}")));
    }
    let mut grad = Vec3::ZERO;
    for i in 0..3 {
        let e = Vec3::axis(i);
        grad[i] = richardson(|h| field.value(point + e * h), step);
    }
    Error::check_finite(grad, "scalar field near finite-difference point")
}

/// Analytic gradient if the field has one, otherwise finite differences at
/// the default step.
pub fn gradient(field: &dyn ScalarField, point: Vec3) -> Result<Vec3> {
    match field.gradient(point) {
        Some(g) => Error::check_finite(g, "analytic gradient"),
        None => fd_gradient(field, point, default_step(point)),
    }
}

/// Jacobian `J[i][j] = d v_i / d gamma_j` by central differences.
pub fn fd_jacobian(field: &dyn VectorField3, point: Vec3, step: f64) -> [[f64; 3]; 3] {
    let mut jac = [[0.0; 3]; 3];
    for j in 0..3 {
        let e = Vec3::axis(j);
        let col = richardson(|h| field.value(point + e * h), step);
        for i in 0..3 {
            jac[i][j] = col[i];
        }
    }
    jac
}

/// Finite-difference curl.
pub fn fd_curl(field: &dyn VectorField3, point: Vec3, step: f64) -> Result<Vec3> {
    let j = fd_jacobian(field, point, step);
    let c = Vec3::new(j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]);
    Error::check_finite(c, "vector field near finite-difference point")
}

/// Analytic curl if available, otherwise finite differences.
pub fn curl(field: &dyn VectorField3, point: Vec3) -> Result<Vec3> {
    match field.curl(point) {
        Some(c) => Error::check_finite(c, "analytic curl"),
        None => fd_curl(field, point, default_step(point)),
    }
}

/// Relative mismatch between a field's analytic gradient and finite
/// differences at `point`; `None` when there is no analytic gradient.
pub fn gradient_mismatch(field: &dyn ScalarField, point: Vec3) -> Option<f64> {
    let analytic = field.gradient(point)?;
    let fd = fd_gradient(field, point, default_step(point)).ok()?;
    Some((analytic - fd).max_abs() / analytic.max_abs().max(1.0))
}
