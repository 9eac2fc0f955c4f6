//! Constructive reduction of `P_{g,f}` to the `e(3)` bracket.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curl::{curl_target_f, solve_curl_equation, CurlSolution};
use super::transform::{apply_gauge_state, p_gf, pushforward_bivector, pushforward_params, GFParams, GaugeTransform};
use crate::error::Result;
use crate::math::sampling::{fibonacci_sphere, probe_rng, random_state};
use crate::math::{self, ScalarFn, StateTS2};
use crate::sphere::e3_bivector;

pub struct Reduction {
    pub transform: GaugeTransform,
    pub solution: CurlSolution,
}

/// Gauge `(1/g, c, h)` with `(gamma, curl h) = F + c`, which sends
/// `P_{g,f}` to the `e(3)` bracket.
pub fn reduce_to_e3(p: &GFParams, band_limit: usize) -> Result<Reduction> {
    let solution = solve_curl_equation(curl_target_f(p).as_ref(), band_limit)?;
    let (g, g2) = (p.g.clone(), p.g.clone());
    let alpha = ScalarFn::new(move |x| 1.0 / g.value(x))
        .with_gradient(move |x| {
            let v = g2.value(x);
            math::gradient(g2.as_ref(), x).unwrap_or(math::Vec3::splat(f64::NAN)) * (-1.0 / (v * v))
        })
        .shared();
    let transform = GaugeTransform::new(alpha, solution.c, solution.h.clone())?;
    Ok(Reduction { transform, solution })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub c: f64,
    #[serde(rename = "L")]
    pub band_limit: usize,
    pub residual: f64,
    /// `max |g~ - 1|` over probe points.
    pub g_tilde_dev: f64,
    /// `max |f~|` over probe points.
    pub f_tilde_dev: f64,
    /// Entrywise `max |J P J^T - P_e3|` over random states.
    pub bracket_dev: f64,
}

/// Probe counts for [`reduction_report`].
#[derive(Clone, Copy, Debug)]
pub struct ReportProbes {
    pub grid_points: usize,
    pub bracket_states: usize,
    pub seed: u64,
}

impl Default for ReportProbes {
    fn default() -> Self {
        ReportProbes {
            grid_points: 400,
            bracket_states: 200,
            seed: 0,
        }
    }
}

fn max_of(values: Vec<f64>) -> f64 {
    // NaN propagates so that a broken evaluation cannot pass.
    values.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// Runs the full reduction and measures how close the result is to `e(3)`.
pub fn reduction_report(p: &GFParams, band_limit: usize, probes: ReportProbes) -> Result<(Reduction, ReductionReport)> {
    let red = reduce_to_e3(p, band_limit)?;
    let pushed = pushforward_params(&red.transform, p)?;
    let points = fibonacci_sphere(probes.grid_points);
    let g_dev = max_of(points.par_iter().map(|&x| (pushed.g.value(x) - 1.0).abs()).collect());
    let f_dev = max_of(points.par_iter().map(|&x| pushed.f.value(x).abs()).collect());

    let mut rng = probe_rng(probes.seed);
    let states: Vec<StateTS2> = (0..probes.bracket_states).map(|_| random_state(&mut rng, 2.0)).collect();
    let devs: Vec<Result<f64>> = states
        .par_iter()
        .map(|x| {
            let pushed = pushforward_bivector(&red.transform, |y| p_gf(p, y), x)?;
            let image = apply_gauge_state(&red.transform, x)?;
            Ok(pushed.max_abs_diff(&e3_bivector(&image)))
        })
        .collect();
    let bracket_dev = max_of(devs.into_iter().collect::<Result<Vec<_>>>()?);

    let report = ReductionReport {
        c: red.solution.c,
        band_limit,
        residual: red.solution.residual,
        g_tilde_dev: g_dev,
        f_tilde_dev: f_dev,
        bracket_dev,
    };
    Ok((red, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::transform::zero_level_bivector;
    use crate::math::sampling::random_zero_level_state;
    use crate::math::{constant, Vec3};

    fn ball() -> GFParams {
        let a = Vec3::new(0.4, 0.5, 0.6);
        let u = move |p: Vec3| 1.0 - p.dot(a.hadamard(p));
        let g = ScalarFn::new(move |p| u(p).sqrt())
            .with_gradient(move |p| a.hadamard(p) * (-1.0 / u(p).sqrt()))
            .shared();
        GFParams::new(g, constant(0.0)).unwrap()
    }

    #[test]
    fn trivial_params_give_identity_gauge() {
        let (red, report) = reduction_report(&GFParams::trivial(), 8, ReportProbes::default()).unwrap();
        assert!((red.transform.c - 1.0).abs() < 1e-14);
        assert!(report.g_tilde_dev < 1e-15);
        assert!(report.f_tilde_dev < 1e-12);
        assert!(report.bracket_dev < 1e-10);
    }

    #[test]
    fn ball_reduces_to_e3() {
        let probes = ReportProbes {
            grid_points: 200,
            bracket_states: 50,
            seed: 3,
        };
        let (_, report) = reduction_report(&ball(), 32, probes).unwrap();
        assert!(report.residual <= 1e-6, "{report:?}");
        assert!(report.g_tilde_dev <= 1e-8, "{report:?}");
        assert!(report.f_tilde_dev <= 1e-5, "{report:?}");
        assert!(report.bracket_dev <= 1e-6, "{report:?}");
    }

    #[test]
    fn under_resolved_solve_warns() {
        let red = reduce_to_e3(&ball(), 2).unwrap();
        assert!(red.solution.warning.is_some());
    }

    #[test]
    fn zero_level_consistency() {
        let p = ball();
        let red = reduce_to_e3(&p, 24).unwrap();
        let mut rng = probe_rng(12);
        for _ in 0..30 {
            let x = random_zero_level_state(&mut rng, 2.0);
            let full = pushforward_bivector(&red.transform, |y| p_gf(&p, y), &x).unwrap();
            let zero = zero_level_bivector(&p.g, |y| p_gf(&p, y), &x).unwrap();
            let d = full.max_abs_diff(&zero);
            assert!(d < 1e-10, "{d:e}");
        }
    }

    #[test]
    fn report_json_shape() {
        let r = ReductionReport {
            c: 1.0,
            band_limit: 4,
            residual: 0.0,
            g_tilde_dev: 0.0,
            f_tilde_dev: 0.0,
            bracket_dev: 0.0,
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["c", "L", "residual", "g_tilde_dev", "f_tilde_dev", "bracket_dev"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
