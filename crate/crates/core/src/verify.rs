//! Seeded verification suites shared by the `check` command, the examples and
//! the tests.
//!
//! Every suite draws its probe states from one seeded generator, evaluates
//! them in parallel and aggregates in input order, so a result depends only on
//! its arguments.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{
    apply_gauge_state, compose, p_gf, pushforward_params, zero_level_bivector, zero_level_reduce, GFParams,
    GaugeTransform,
};
use crate::math::sampling::{probe_rng, random_in_cube, random_state, random_unit, random_zero_level_state};
use crate::math::{jacobiator, Bivector6, FdOnly, Scalar, ScalarFn, StateTS2, Vec3, Vector, VectorFn};
use crate::models::{ball_system, duality_map, BallHamiltonian, BallParams, VeselovaParams};
use crate::planar::{self, PlanarState};
use crate::sim::{integrate_planar, IntegratorConfig};
use crate::sphere::{assemble_p, conformal_residual, e3_bivector, measure_residual, SFunctionSpec, SphereSystem};
use crate::tolerance::Tolerances;

/// Half-width of the cube `M` is drawn from.
pub const M_SCALE: f64 = 2.0;

/// One measured quantity and the bound it is held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `true` when the value must stay at or below the threshold, `false`
    /// when it must reach it.
    pub upper_bound: bool,
    pub pass: bool,
}

impl Metric {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            threshold,
            upper_bound: true,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            threshold,
            upper_bound: false,
            pass: value >= threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub model: Option<String>,
    pub samples: usize,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: &str, model: Option<&str>, samples: usize, seed: u64, metrics: Vec<Metric>) -> Self {
        let pass = metrics.iter().all(|m| m.pass);
        SuiteReport {
            suite: suite.into(),
            model: model.map(str::to_string),
            samples,
            seed,
            metrics,
            pass,
        }
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

pub fn seeded_states(n: usize, seed: u64) -> Vec<StateTS2> {
    let mut rng = probe_rng(seed);
    (0..n).map(|_| random_state(&mut rng, M_SCALE)).collect()
}

pub fn seeded_zero_level_states(n: usize, seed: u64) -> Vec<StateTS2> {
    let mut rng = probe_rng(seed);
    (0..n).map(|_| random_zero_level_state(&mut rng, M_SCALE)).collect()
}

/// Evaluates `f` at every state in parallel, keeping input order.
fn par_values(states: &[StateTS2], f: impl Fn(&StateTS2) -> Result<f64> + Sync + Send) -> Result<Vec<f64>> {
    states.par_iter().map(f).collect()
}

/// Maximum that lets NaN through, so a broken evaluation cannot pass.
pub fn nan_max(values: &[f64]) -> f64 {
    values
        .iter()
        .fold(0.0, |m: f64, &v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// Finite-difference Jacobiator of the system's bracket at one state.
pub fn jacobiator_at(sys: &SphereSystem, x: &StateTS2) -> f64 {
    jacobiator(|y| assemble_p(sys, y).unwrap_or_else(|_| nan_bivector()), x)
}

fn nan_bivector() -> Bivector6 {
    Bivector6::from_blocks(
        crate::math::Mat3([[f64::NAN; 3]; 3]),
        crate::math::Mat3::ZERO,
        crate::math::Mat3::ZERO,
    )
}

pub fn jacobi_suite(sys: &SphereSystem, n: usize, seed: u64) -> Result<SuiteReport> {
    let values = par_values(&seeded_states(n, seed), |x| Ok(jacobiator_at(sys, x)))?;
    let tol = Tolerances::default();
    Ok(SuiteReport::new(
        "jacobi",
        Some(&sys.name),
        n,
        seed,
        vec![Metric::at_most("max_jacobiator", nan_max(&values), tol.jacobi)],
    ))
}

/// The ball Hamiltonian and `S` paired with the wrong density `rho = 1`, so
/// the bracket is `g = 1` with the ball's `K`.
pub fn mismatched_measure_system(params: &BallParams) -> Result<SphereSystem> {
    params.validate()?;
    let p = params.clone();
    let k_field: Vector = VectorFn::new(move |gamma: Vec3| p.a_vec().hadamard(gamma) / p.u(gamma)).shared();
    let spec = SFunctionSpec::Direct {
        k_field,
        offset: crate::math::constant(0.0),
    };
    let ham = Arc::new(BallHamiltonian { params: params.clone() });
    Ok(SphereSystem::new("ball-mismatched-measure", ham, spec, Vec3::ZERO)?.with_density(crate::math::constant(1.0)))
}

/// Jacobiator of the mismatched-measure control. Passes when the bracket
/// fails Jacobi by more than the control bound on a large enough fraction of
/// states.
pub fn negative_control_suite(n: usize, seed: u64) -> Result<SuiteReport> {
    let sys = mismatched_measure_system(&BallParams::default())?;
    let values = par_values(&seeded_states(n, seed), |x| Ok(jacobiator_at(&sys, x)))?;
    let tol = Tolerances::default();
    let above = values.iter().filter(|v| **v > tol.jacobi_negative_control).count();
    let fraction = if n == 0 { 0.0 } else { above as f64 / n as f64 };
    let median = {
        let mut v = values.clone();
        v.sort_by(f64::total_cmp);
        v.get(v.len() / 2).copied().unwrap_or(0.0)
    };
    let mut metrics = vec![Metric::at_least("fraction_above_control_bound", fraction, tol.negative_control_fraction)];
    metrics.push(Metric::at_least("median_jacobiator", median, tol.jacobi_negative_control));
    metrics.push(Metric::at_least("max_jacobiator", nan_max(&values), tol.jacobi_negative_control));
    Ok(SuiteReport::new("jacobi-negative-control", Some(&sys.name), n, seed, metrics))
}

pub fn measure_suite(sys: &SphereSystem, n: usize, seed: u64) -> Result<SuiteReport> {
    let values = par_values(&seeded_states(n, seed), |x| Ok(measure_residual(sys, x)?.norm()))?;
    Ok(SuiteReport::new(
        "measure",
        Some(&sys.name),
        n,
        seed,
        vec![Metric::at_most("max_measure_residual", nan_max(&values), Tolerances::default().measure_residual)],
    ))
}

pub fn conformal_suite(sys: &SphereSystem, n: usize, seed: u64) -> Result<SuiteReport> {
    let values = par_values(&seeded_states(n, seed), |x| conformal_residual(sys, x))?;
    Ok(SuiteReport::new(
        "conformal",
        Some(&sys.name),
        n,
        seed,
        vec![Metric::at_most(
            "max_conformal_residual",
            nan_max(&values),
            Tolerances::default().conformal_residual,
        )],
    ))
}

/// `|H_ball - M^2/(2D) + H_veselova/D|` and `|g_ball - g_veselova/sqrt(D)|`.
pub fn duality_suite(vparams: &VeselovaParams, d: f64, n: usize, seed: u64) -> Result<SuiteReport> {
    let ball = ball_system(&duality_map(vparams, d)?)?;
    let ves = crate::models::veselova_system(vparams)?;
    let states = seeded_states(n, seed);
    let h_dev = par_values(&states, |x| {
        Ok((ball.hamiltonian.value(x) - 0.5 / d * x.m.norm_squared() + ves.hamiltonian.value(x) / d).abs())
    })?;
    let g_dev = par_values(&states, |x| Ok((ball.g_value(x.gamma)? - ves.g_value(x.gamma)? / d.sqrt()).abs()))?;
    let tol = Tolerances::default().duality;
    Ok(SuiteReport::new(
        "duality",
        Some("ball/veselova"),
        n,
        seed,
        vec![
            Metric::at_most("max_hamiltonian_identity", nan_max(&h_dev), tol),
            Metric::at_most("max_g_relation", nan_max(&g_dev), tol),
        ],
    ))
}

/// Two fixed non-trivial gauge transforms used by the gauge suite and the
/// examples.
pub fn demo_transforms() -> Result<(GaugeTransform, GaugeTransform)> {
    let alpha1: Scalar = ScalarFn::new(|p: Vec3| 1.0 + 0.2 * p.x * p.x + 0.1 * p.y * p.z)
        .with_gradient(|p: Vec3| Vec3::new(0.4 * p.x, 0.1 * p.z, 0.1 * p.y))
        .shared();
    let h1: Vector = VectorFn::new(|p: Vec3| Vec3::new(p.y * p.z, 0.3 * p.x, p.x.sin()))
        .with_curl(|p: Vec3| Vec3::new(0.0, p.y - p.x.cos(), 0.3 - p.z))
        .shared();
    let alpha2: Scalar = ScalarFn::new(|p: Vec3| 0.8 + 0.1 * p.z)
        .with_gradient(|_| Vec3::new(0.0, 0.0, 0.1))
        .shared();
    let h2: Vector = VectorFn::new(|p: Vec3| Vec3::new(0.2, -p.z, p.y * p.y))
        .with_curl(|p: Vec3| Vec3::new(2.0 * p.y + 1.0, 0.0, 0.0))
        .shared();
    Ok((GaugeTransform::new(alpha1, 1.3, h1)?, GaugeTransform::new(alpha2, -0.7, h2)?))
}

/// Ball `g` with a non-zero `f`, so that every term of the push-forward rule
/// is exercised.
pub fn demo_gf_params() -> Result<GFParams> {
    let a = Vec3::new(0.4, 0.5, 0.6);
    let u = move |p: Vec3| 1.0 - p.dot(a.hadamard(p));
    let g = ScalarFn::new(move |p| u(p).sqrt())
        .with_gradient(move |p| a.hadamard(p) * (-1.0 / u(p).sqrt()))
        .shared();
    let f = ScalarFn::new(|p: Vec3| 0.1 * p.x + 0.05).with_gradient(|_| Vec3::new(0.1, 0.0, 0.0)).shared();
    GFParams::new(g, f)
}

/// Group law at the level of states and the action rule on `(g, f)`. The rule
/// is checked twice: two analytic steps against the analytic composite, and
/// two steps driven by finite differences only against the same composite.
pub fn gauge_suite(n: usize, seed: u64) -> Result<SuiteReport> {
    let (t1, t2) = demo_transforms()?;
    let composed = compose(&t2, &t1);
    let states = seeded_states(n, seed);
    let law = par_values(&states, |x| {
        let seq = apply_gauge_state(&t2, &apply_gauge_state(&t1, x)?)?;
        let one = apply_gauge_state(&composed, x)?;
        Ok((seq.m - one.m).max_abs())
    })?;

    let p = demo_gf_params()?;
    let two_step = pushforward_params(&t2, &pushforward_params(&t1, &p)?)?;
    let one_step = pushforward_params(&composed, &p)?;
    let fd = GFParams {
        g: Arc::new(FdOnly(p.g.clone())),
        f: Arc::new(FdOnly(p.f.clone())),
    };
    let fd_two = pushforward_params(&t2, &pushforward_params(&t1, &fd)?)?;
    let mut rng = probe_rng(seed ^ 0x9e37_79b9);
    let points: Vec<Vec3> = (0..n).map(|_| random_unit(&mut rng)).collect();
    let analytic: Vec<f64> = points
        .par_iter()
        .map(|&x| {
            (two_step.g.value(x) - one_step.g.value(x))
                .abs()
                .max((two_step.f.value(x) - one_step.f.value(x)).abs())
        })
        .collect();
    let fd_dev: Vec<f64> = points
        .par_iter()
        .map(|&x| {
            (fd_two.g.value(x) - one_step.g.value(x))
                .abs()
                .max((fd_two.f.value(x) - one_step.f.value(x)).abs())
        })
        .collect();
    let tol = Tolerances::default();
    Ok(SuiteReport::new(
        "gauge",
        None,
        n,
        seed,
        vec![
            Metric::at_most("max_group_law", nan_max(&law), tol.group_law),
            Metric::at_most("max_action_analytic", nan_max(&analytic), tol.action_analytic),
            Metric::at_most("max_action_fd", nan_max(&fd_dev), tol.action_fd),
        ],
    ))
}

/// On `(M, gamma) = 0` the rescaling `M -> M/g` sends the system's bracket to
/// the `e(3)` bracket.
pub fn zero_level_suite(sys: &SphereSystem, n: usize, seed: u64) -> Result<SuiteReport> {
    let p = GFParams::from_system(sys)?;
    let values = par_values(&seeded_zero_level_states(n, seed), |x| {
        let reduced = zero_level_bivector(&p.g, |y| p_gf(&p, y), x)?;
        let image = zero_level_reduce(&p.g, x)?;
        Ok(reduced.max_abs_diff(&e3_bivector(&image)))
    })?;
    Ok(SuiteReport::new(
        "zero-level",
        Some(&sys.name),
        n,
        seed,
        vec![Metric::at_most("max_bracket_deviation", nan_max(&values), Tolerances::default().zero_level)],
    ))
}

/// Initial state of the planar demo run.
pub fn planar_demo_state() -> PlanarState {
    PlanarState::new([0.3, -0.2], [0.5, 0.4])
}

/// Energy drift over `[0, horizon]`, conformal residual at `n` probes, and
/// whether the measure gate refuses the inadmissible variant.
pub fn planar_suite(n: usize, seed: u64, horizon: f64) -> Result<SuiteReport> {
    let sys = planar::demo_system();
    let tol = Tolerances::default();
    let traj = integrate_planar(&sys, &planar_demo_state(), &IntegratorConfig::default().with_horizon(horizon))?;

    let mut rng = probe_rng(seed);
    let probes: Vec<PlanarState> = (0..n)
        .map(|_| {
            let a = random_in_cube(&mut rng, 1.0);
            let b = random_in_cube(&mut rng, 1.0);
            PlanarState::new([a.x, a.y], [b.x, b.y])
        })
        .collect();
    let residuals: Vec<f64> = probes
        .par_iter()
        .map(|s| planar::to_conformal(&sys, s, tol.planar_measure_gate).map(|c| c.residual))
        .collect::<Result<_>>()?;
    let measure: Vec<f64> = probes
        .iter()
        .map(|s| planar::measure_residual(&sys, s.q).map(|r| r[0].abs().max(r[1].abs())))
        .collect::<Result<_>>()?;

    let bad = planar::inadmissible_demo_system();
    let rejected = probes
        .iter()
        .filter(|s| matches!(planar::to_conformal(&bad, s, tol.planar_measure_gate), Err(Error::MeasureViolated { .. })))
        .count();
    let rejected_fraction = if n == 0 { 1.0 } else { rejected as f64 / n as f64 };

    Ok(SuiteReport::new(
        "planar",
        Some("planar-demo"),
        n,
        seed,
        vec![
            Metric::at_most("energy_drift", traj.energy_drift(), tol.integral_drift),
            Metric::at_most("max_measure_residual", nan_max(&measure), tol.planar_measure_gate),
            Metric::at_most("max_conformal_residual", nan_max(&residuals), tol.planar_conformal),
            Metric::at_least("inadmissible_rejected_fraction", rejected_fraction, 1.0),
        ],
    ))
}
