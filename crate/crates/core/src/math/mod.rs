//! Shared numerical primitives.

mod bivector;
mod field;
mod linalg;

pub use bivector::{jacobiator, jacobiator_n, Bivector6, StateTS2};
pub use field::{
    constant, curl, default_step, fd_curl, fd_gradient, fd_jacobian, gradient, gradient_mismatch,
    zero_vector_field, Constant, ConstantVector, FdOnly, Scalar, ScalarField, ScalarFn, Vector,
    VectorField3, VectorFn,
};
pub(crate) use field::richardson;
pub use linalg::{hat, Mat3, Vec3};

pub mod sampling;
