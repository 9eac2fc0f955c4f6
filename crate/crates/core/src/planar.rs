//! Generalized Chaplygin systems with two degrees of freedom.
//!
//! Equations of motion in momentum form:
//!
//! ```text
//! q_i' = dH/dP_i
//! P_1' = -dH/dq_1 + (dH/dP_2) S
//! P_2' = -dH/dq_2 - (dH/dP_1) S,      S = A_1(q) P_1 + A_2(q) P_2 + B(q)
//! ```
//!
//! When a density `N(q)` of an invariant measure `N dP dq` exists, the
//! rescaled momenta `p = N P` turn the flow into `N` times the Hamiltonian
//! vector field of `H(q, p/N)` for the bracket `{q_i, p_j} = delta_ij`,
//! `{p_1, p_2} = N B`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::richardson;
use crate::tolerance::FD_STEP;

pub type Pair = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

type Coef = Arc<dyn Fn(Pair) -> f64 + Send + Sync>;
type CoefGrad = Arc<dyn Fn(Pair) -> Pair + Send + Sync>;
type MatField = Arc<dyn Fn(Pair) -> Mat2 + Send + Sync>;
type HamFn = Arc<dyn Fn(Pair, Pair) -> f64 + Send + Sync>;
/// `(dH/dq, dH/dP)`
type HamGrad = Arc<dyn Fn(Pair, Pair) -> (Pair, Pair) + Send + Sync>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanarState {
    pub q: Pair,
    /// Momenta `P = dL/dq'`.
    pub momenta: Pair,
}

impl PlanarState {
    pub fn new(q: Pair, momenta: Pair) -> Self {
        PlanarState { q, momenta }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q[0], self.q[1], self.momenta[0], self.momenta[1]]
    }

    pub fn from_array(a: &[f64; 4]) -> Self {
        PlanarState::new([a[0], a[1]], [a[2], a[3]])
    }
}

/// Quadratic Lagrangian `L = 1/2 q'^T G(q) q' - V(q)` with gyroscopic
/// coefficients `S = a_1 q_1' + a_2 q_2' + b`.
#[derive(Clone)]
pub struct PlanarLagrangian {
    pub kinetic: MatField,
    pub potential: Coef,
    pub a1: Coef,
    pub a2: Coef,
    pub b: Coef,
}

fn inverse2(g: Mat2) -> Result<Mat2> {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if !(g[0][0] > 0.0 && det > 0.0) {
        return Err(Error::Precondition(format!(
            "kinetic matrix is not positive definite (leading minors {:e}, {:e})",
            g[0][0], det
        )));
    }
    Ok([[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]])
}

fn mul2(m: Mat2, v: Pair) -> Pair {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn dot2(a: Pair, b: Pair) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl PlanarLagrangian {
    pub fn lagrangian(&self, q: Pair, qdot: Pair) -> f64 {
        0.5 * dot2(qdot, mul2((self.kinetic)(q), qdot)) - (self.potential)(q)
    }

    /// `dL/dq'` by finite differences, independent of the kinetic matrix.
    pub fn velocity_gradient_fd(&self, q: Pair, qdot: Pair) -> Pair {
        let step = FD_STEP * qdot[0].abs().max(qdot[1].abs()).max(1.0);
        std::array::from_fn(|i| {
            richardson(
                |h| {
                    let mut v = qdot;
                    v[i] += h;
                    self.lagrangian(q, v)
                },
                step,
            )
        })
    }
}

/// Legendre transform: returns `(P, H)` with `P = G q'` and
/// `H = 1/2 P^T G^{-1} P + V`.
pub fn legendre(lag: &PlanarLagrangian, q: Pair, qdot: Pair) -> Result<(Pair, f64)> {
    let g = (lag.kinetic)(q);
    let ginv = inverse2(g)?;
    let p = mul2(g, qdot);
    let h = 0.5 * dot2(p, mul2(ginv, p)) + (lag.potential)(q);
    Ok((p, h))
}

/// A generalized Chaplygin system in momentum form.
#[derive(Clone)]
pub struct PlanarSystem {
    pub hamiltonian: HamFn,
    pub hamiltonian_grad: HamGrad,
    pub a1: Coef,
    pub a2: Coef,
    pub b: Coef,
    pub density: Coef,
    pub density_grad: CoefGrad,
    /// Usual Chaplygin system: the free term `B` is dropped.
    pub usual_chaplygin: bool,
}

impl fmt::Debug for PlanarSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlanarSystem")
            .field("usual_chaplygin", &self.usual_chaplygin)
            .finish_non_exhaustive()
    }
}

impl PlanarSystem {
    /// Builds the momentum form of a quadratic Lagrangian system.
    ///
    /// `A = G^{-1} a` since `S = a . q' + b = a . G^{-1} P + b`. The
    /// coordinate derivative of `H` is taken by finite differences.
    pub fn from_lagrangian(
        lag: PlanarLagrangian,
        density: impl Fn(Pair) -> f64 + Send + Sync + 'static,
        density_grad: impl Fn(Pair) -> Pair + Send + Sync + 'static,
    ) -> Self {
        let lag = Arc::new(lag);
        let ham = {
            let lag = lag.clone();
            move |q: Pair, p: Pair| {
                let g = (lag.kinetic)(q);
                let ginv = inverse2(g).unwrap_or([[f64::NAN; 2]; 2]);
                0.5 * dot2(p, mul2(ginv, p)) + (lag.potential)(q)
            }
        };
        let ham = Arc::new(ham);
        let grad = {
            let lag = lag.clone();
            let ham = ham.clone();
            move |q: Pair, p: Pair| {
                let ginv = inverse2((lag.kinetic)(q)).unwrap_or([[f64::NAN; 2]; 2]);
                let step = FD_STEP * q[0].abs().max(q[1].abs()).max(1.0);
                let dq: Pair = std::array::from_fn(|i| {
                    richardson(
                        |h| {
                            let mut y = q;
                            y[i] += h;
                            ham(y, p)
                        },
                        step,
                    )
                });
                (dq, mul2(ginv, p))
            }
        };
        let a_vec = {
            let lag = lag.clone();
            move |q: Pair| {
                let ginv = inverse2((lag.kinetic)(q)).unwrap_or([[f64::NAN; 2]; 2]);
                mul2(ginv, [(lag.a1)(q), (lag.a2)(q)])
            }
        };
        let a_vec = Arc::new(a_vec);
        let a1 = {
            let a = a_vec.clone();
            move |q: Pair| a(q)[0]
        };
        let a2 = move |q: Pair| a_vec(q)[1];
        let b = {
            let lag = lag.clone();
            move |q: Pair| (lag.b)(q)
        };
        PlanarSystem {
            hamiltonian: ham,
            hamiltonian_grad: Arc::new(grad),
            a1: Arc::new(a1),
            a2: Arc::new(a2),
            b: Arc::new(b),
            density: Arc::new(density),
            density_grad: Arc::new(density_grad),
            usual_chaplygin: false,
        }
    }

    pub fn energy(&self, s: &PlanarState) -> f64 {
        (self.hamiltonian)(s.q, s.momenta)
    }

    fn free_term(&self, q: Pair) -> f64 {
        if self.usual_chaplygin {
            0.0
        } else {
            (self.b)(q)
        }
    }

    /// `S = A_1 P_1 + A_2 P_2 + B`
    pub fn s_value(&self, s: &PlanarState) -> f64 {
        (self.a1)(s.q) * s.momenta[0] + (self.a2)(s.q) * s.momenta[1] + self.free_term(s.q)
    }
}

/// Right-hand side `(q_1', q_2', P_1', P_2')`.
pub fn planar_rhs(sys: &PlanarSystem, s: &PlanarState) -> [f64; 4] {
    let (hq, hp) = (sys.hamiltonian_grad)(s.q, s.momenta);
    let sv = sys.s_value(s);
    [hp[0], hp[1], -hq[0] + hp[1] * sv, -hq[1] - hp[0] * sv]
}

fn checked_density(sys: &PlanarSystem, q: Pair) -> Result<f64> {
    let n = (sys.density)(q);
    if n > 0.0 && n.is_finite() {
        Ok(n)
    } else {
        Err(Error::Domain(format!("measure density N(q) = {n:e} is not positive at q = {q:?}")))
    }
}

/// Residuals of the invariant-measure conditions:
/// `r_1 = N_q1 / N - A_2`, `r_2 = N_q2 / N + A_1`.
pub fn measure_residual(sys: &PlanarSystem, q: Pair) -> Result<Pair> {
    let n = checked_density(sys, q)?;
    let dn = (sys.density_grad)(q);
    Ok([dn[0] / n - (sys.a2)(q), dn[1] / n + (sys.a1)(q)])
}

/// Conformally Hamiltonian representation at one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalPoint {
    /// Rescaled momenta `p = N P`.
    pub p: Pair,
    /// `{p_1, p_2} = N B`.
    pub bracket_p1p2: f64,
    /// Conformal factor `N`.
    pub factor: f64,
    /// `max |pushforward of the flow - N X_H|`.
    pub residual: f64,
}

/// Momenta round trip helpers.
pub fn rescale_momenta(n: f64, momenta: Pair) -> Pair {
    [n * momenta[0], n * momenta[1]]
}

pub fn unscale_momenta(n: f64, p: Pair) -> Pair {
    [p[0] / n, p[1] / n]
}

/// Rewrites the flow at `s` in conformally Hamiltonian form. Refuses when the
/// measure condition fails by more than `gate`.
pub fn to_conformal(sys: &PlanarSystem, s: &PlanarState, gate: f64) -> Result<ConformalPoint> {
    let [r1, r2] = measure_residual(sys, s.q)?;
    if r1.abs().max(r2.abs()) > gate {
        return Err(Error::MeasureViolated { r1, r2 });
    }
    conformal_point(sys, s)
}

/// Same as [`to_conformal`] without the measure gate; the residual then
/// quantifies how far the flow is from the conformal form.
pub fn conformal_point(sys: &PlanarSystem, s: &PlanarState) -> Result<ConformalPoint> {
    let n = checked_density(sys, s.q)?;
    let dn = (sys.density_grad)(s.q);
    let p = rescale_momenta(n, s.momenta);
    let nb = n * sys.free_term(s.q);

    // Pushforward of the flow under (q, P) -> (q, N P).
    let f = planar_rhs(sys, s);
    let ndot = dn[0] * f[0] + dn[1] * f[1];
    let pushed = [f[0], f[1], ndot * s.momenta[0] + n * f[2], ndot * s.momenta[1] + n * f[3]];

    // Hamiltonian vector field of Hbar(q, p) = H(q, p / N).
    let (hq, hp) = (sys.hamiltonian_grad)(s.q, s.momenta);
    let hbar_p = [hp[0] / n, hp[1] / n];
    let radial = dot2(hp, s.momenta) / n;
    let hbar_q = [hq[0] - radial * dn[0], hq[1] - radial * dn[1]];
    let xh = [
        hbar_p[0],
        hbar_p[1],
        -hbar_q[0] + nb * hbar_p[1],
        -hbar_q[1] - nb * hbar_p[0],
    ];
    let residual = (0..4).fold(0.0f64, |m, i| m.max((pushed[i] - n * xh[i]).abs()));
    Ok(ConformalPoint {
        p,
        bracket_p1p2: nb,
        factor: n,
        residual,
    })
}

/// The bracket in coordinates `(q_1, q_2, p_1, p_2)` as a 4x4 matrix.
pub fn conformal_bracket(sys: &PlanarSystem, q: Pair) -> [[f64; 4]; 4] {
    let nb = (sys.density)(q) * sys.free_term(q);
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, nb],
        [0.0, -1.0, -nb, 0.0],
    ]
}

/// Admissible demo system: `H = (P_1^2 + P_2^2)/2 + (q_1^2 + 2 q_2^2)/2`,
/// `A_1 = 0`, `A_2 = 1`, `B = 1/2 + 3/10 sin q_1 cos q_2`, `N = exp(q_1)`.
pub fn demo_system() -> PlanarSystem {
    PlanarSystem {
        hamiltonian: Arc::new(|q, p| 0.5 * (p[0] * p[0] + p[1] * p[1]) + 0.5 * (q[0] * q[0] + 2.0 * q[1] * q[1])),
        hamiltonian_grad: Arc::new(|q, p| ([q[0], 2.0 * q[1]], p)),
        a1: Arc::new(|_| 0.0),
        a2: Arc::new(|_| 1.0),
        b: Arc::new(|q| 0.5 + 0.3 * q[0].sin() * q[1].cos()),
        density: Arc::new(|q| q[0].exp()),
        density_grad: Arc::new(|q| [q[0].exp(), 0.0]),
        usual_chaplygin: false,
    }
}

/// The demo system with `A_2 = 0`, for which `exp(q_1)` is not an invariant
/// density.
pub fn inadmissible_demo_system() -> PlanarSystem {
    PlanarSystem {
        a2: Arc::new(|_| 0.0),
        ..demo_system()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_lagrangian() -> PlanarLagrangian {
        PlanarLagrangian {
            kinetic: Arc::new(|_| [[1.0, 0.0], [0.0, 1.0]]),
            potential: Arc::new(|_| 0.0),
            a1: Arc::new(|_| 0.0),
            a2: Arc::new(|_| 0.0),
            b: Arc::new(|_| 0.0),
        }
    }

    #[test]
    fn legendre_identity_kinetic() {
        let (p, h) = legendre(&identity_lagrangian(), [0.0, 0.0], [1.0, 2.0]).unwrap();
        assert_eq!(p, [1.0, 2.0]);
        assert_eq!(h, 2.5);
    }

    #[test]
    fn legendre_diag_kinetic() {
        let lag = PlanarLagrangian {
            kinetic: Arc::new(|_| [[2.0, 0.0], [0.0, 1.0]]),
            ..identity_lagrangian()
        };
        let (p, h) = legendre(&lag, [0.3, 0.1], [1.0, 0.0]).unwrap();
        assert_eq!(p, [2.0, 0.0]);
        assert_eq!(h, 1.0);
    }

    #[test]
    fn legendre_rejects_singular_kinetic() {
        let lag = PlanarLagrangian {
            kinetic: Arc::new(|_| [[1.0, 1.0], [1.0, 1.0]]),
            ..identity_lagrangian()
        };
        assert!(matches!(legendre(&lag, [0.0, 0.0], [1.0, 0.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_gyroscopic_terms_give_hamilton_equations() {
        let sys = PlanarSystem {
            a2: Arc::new(|_| 0.0),
            b: Arc::new(|_| 0.0),
            ..demo_system()
        };
        let s = PlanarState::new([0.4, -0.3], [1.1, 0.7]);
        let f = planar_rhs(&sys, &s);
        assert_eq!(f, [1.1, 0.7, -0.4, 0.6]);
    }

    #[test]
    fn free_term_only() {
        let sys = PlanarSystem {
            a2: Arc::new(|_| 0.0),
            ..demo_system()
        };
        let s = PlanarState::new([0.4, -0.3], [1.1, 0.7]);
        let b = (sys.b)(s.q);
        let f = planar_rhs(&sys, &s);
        assert!((f[2] - (-0.4 + b * 0.7)).abs() < 1e-15);
        assert!((f[3] - (0.6 - b * 1.1)).abs() < 1e-15);
    }

    #[test]
    fn usual_chaplygin_flag_drops_free_term() {
        let sys = PlanarSystem {
            a2: Arc::new(|_| 0.0),
            usual_chaplygin: true,
            ..demo_system()
        };
        let s = PlanarState::new([0.4, -0.3], [1.1, 0.7]);
        assert_eq!(sys.s_value(&s), 0.0);
        assert_eq!(conformal_point(&sys, &s).unwrap().bracket_p1p2, 0.0);
    }

    #[test]
    fn measure_residual_examples() {
        let demo = demo_system();
        assert_eq!(measure_residual(&demo, [0.7, -0.2]).unwrap(), [0.0, 0.0]);

        let flat = PlanarSystem {
            a2: Arc::new(|_| 0.0),
            density: Arc::new(|_| 1.0),
            density_grad: Arc::new(|_| [0.0, 0.0]),
            ..demo_system()
        };
        assert_eq!(measure_residual(&flat, [0.7, -0.2]).unwrap(), [0.0, 0.0]);

        let bad = inadmissible_demo_system();
        assert_eq!(measure_residual(&bad, [0.7, -0.2]).unwrap(), [1.0, 0.0]);
    }

    #[test]
    fn measure_residual_rejects_nonpositive_density() {
        let sys = PlanarSystem {
            density: Arc::new(|_| -1.0),
            ..demo_system()
        };
        assert!(matches!(measure_residual(&sys, [0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn canonical_case_is_exact() {
        let sys = PlanarSystem {
            a2: Arc::new(|_| 0.0),
            b: Arc::new(|_| 0.0),
            density: Arc::new(|_| 1.0),
            density_grad: Arc::new(|_| [0.0, 0.0]),
            ..demo_system()
        };
        let s = PlanarState::new([0.2, 0.9], [-0.5, 0.3]);
        let c = to_conformal(&sys, &s, 1e-8).unwrap();
        assert_eq!(c.p, s.momenta);
        assert_eq!(c.bracket_p1p2, 0.0);
        assert_eq!(c.residual, 0.0);
    }

    #[test]
    fn momentum_round_trip() {
        let n = 1.7_f64.exp();
        let p = [0.123, -4.56];
        let back = rescale_momenta(n, unscale_momenta(n, p));
        assert!((back[0] - p[0]).abs() <= 1e-14 * p[0].abs().max(1.0));
        assert!((back[1] - p[1]).abs() <= 1e-14 * p[1].abs().max(1.0));
    }

    #[test]
    fn gate_refuses_inadmissible_system() {
        let sys = inadmissible_demo_system();
        let err = to_conformal(&sys, &PlanarState::new([0.1, 0.2], [1.0, 0.0]), 1e-8).unwrap_err();
        assert_eq!(err, Error::MeasureViolated { r1: 1.0, r2: 0.0 });
        assert!(err.to_string().contains("1e0"));
    }
}
