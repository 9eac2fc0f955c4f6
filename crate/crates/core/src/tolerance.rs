//! Numerical thresholds shared by the library, the `check` command and the
//! acceptance tests. Everything tunable lives in [`Tolerances`].

use serde::{Deserialize, Serialize};

/// Default relative step for central finite differences.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed deviation of `|gamma|^2` from one for on-manifold states.
    pub unit_gamma: f64,
    /// Relative agreement between analytic and finite-difference gradients.
    pub gradient_check: f64,
    /// Finite-difference Jacobiator bound for the rank-4 brackets.
    pub jacobi: f64,
    /// Lower bound the mismatched-measure control must exceed.
    pub jacobi_negative_control: f64,
    /// Fraction of states on which the negative control must exceed its bound.
    pub negative_control_fraction: f64,
    pub measure_residual: f64,
    pub conformal_residual: f64,
    /// Relative drift of first integrals over a monitored run.
    pub integral_drift: f64,
    pub duality: f64,
    pub zero_level: f64,
    pub curl_residual: f64,
    pub g_tilde: f64,
    pub f_tilde: f64,
    pub bracket: f64,
    /// Gate used when refusing to build a planar conformal representation.
    pub planar_measure_gate: f64,
    pub planar_conformal: f64,
    pub group_law: f64,
    pub action_fd: f64,
    pub action_analytic: f64,
    pub reparametrization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unit_gamma: 1e-9,
            gradient_check: 1e-6,
            jacobi: 1e-6,
            jacobi_negative_control: 1e-3,
            negative_control_fraction: 0.9,
            measure_residual: 1e-10,
            conformal_residual: 1e-10,
            integral_drift: 1e-8,
            duality: 1e-12,
            zero_level: 1e-12,
            curl_residual: 1e-6,
            g_tilde: 1e-8,
            f_tilde: 1e-5,
            bracket: 1e-6,
            planar_measure_gate: 1e-8,
            planar_conformal: 1e-8,
            group_law: 1e-12,
            action_fd: 1e-8,
            action_analytic: 1e-10,
            reparametrization: 1e-6,
        }
    }
}
