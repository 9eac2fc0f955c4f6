//! Conformally Hamiltonian nonholonomic systems.
//!
//! The crate covers generalized Chaplygin systems with two degrees of freedom
//! ([`planar`]), systems on `R^6 = (M, gamma)` whose phase space foliates into
//! copies of `T*S^2` ([`sphere`]), the Chaplygin ball and the Veselova system
//! with and without a gyrostat ([`models`]), the gauge group acting on the
//! family of rank-4 brackets `P_{g,f}` and its reduction to the `e(3)`
//! Lie-Poisson bracket ([`gauge`]), and an adaptive Dormand-Prince integrator
//! with drift monitoring ([`sim`]).

pub mod cli;
pub mod error;
pub mod gauge;
pub mod math;
pub mod models;
pub mod planar;
pub mod sim;
pub mod sphere;
pub mod tolerance;
pub mod verify;

pub use error::{Error, Result};
