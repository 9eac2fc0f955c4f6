//! Trajectories of sphere and planar systems, the conformal time change and
//! drift monitoring of first integrals.

mod dopri;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dopri::{hermite, integrate, IntegratorConfig, Solution, StepStats};

use crate::error::{Error, Result};
use crate::math::{sampling, StateTS2};
use crate::planar::{planar_rhs, PlanarState, PlanarSystem};
use crate::sphere::{integrals, rhs_array, IntegralValues, SphereSystem};

fn project(y: &mut [f64; 6]) {
    let n = (y[3] * y[3] + y[4] * y[4] + y[5] * y[5]).sqrt();
    if n > 0.0 {
        for v in &mut y[3..6] {
            *v /= n;
        }
    }
}

/// A sampled sphere-system trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateTS2>,
    /// Right-hand side at each sample, kept for Hermite interpolation.
    pub derivatives: Vec<[f64; 6]>,
    pub integrals: Vec<IntegralValues>,
    pub stats: StepStats,
}

impl Trajectory {
    /// Cubic Hermite interpolation at `t` within the sampled range.
    pub fn interpolate(&self, t: f64) -> Result<StateTS2> {
        let (first, last) = (self.times[0], *self.times.last().unwrap_or(&self.times[0]));
        if !(t >= first && t <= last) {
            return Err(Error::Precondition(format!("time {t} outside sampled range [{first}, {last}]")));
        }
        let i = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            k => (k - 1).min(self.times.len() - 2),
        };
        let y = hermite(
            self.times[i],
            &self.states[i].to_array(),
            &self.derivatives[i],
            self.times[i + 1],
            &self.states[i + 1].to_array(),
            &self.derivatives[i + 1],
            t,
        );
        Ok(StateTS2::from_array(&y))
    }
}

/// Integrates `sys` from `x0` over `[0, cfg.horizon]`.
pub fn integrate_system(sys: &SphereSystem, x0: &StateTS2, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let sol = integrate(
        |_, y: &[f64; 6]| rhs_array(sys, &StateTS2::from_array(y)),
        x0.to_array(),
        cfg,
        |y| {
            if cfg.project_gamma {
                project(y)
            }
        },
    )?;
    let states: Vec<StateTS2> = sol.states.iter().map(StateTS2::from_array).collect();
    let derivatives = states.iter().map(|x| rhs_array(sys, x)).collect::<Result<Vec<_>>>()?;
    let integrals = states.iter().map(|x| integrals(sys, x)).collect();
    Ok(Trajectory {
        times: sol.times,
        states,
        derivatives,
        integrals,
        stats: sol.stats,
    })
}

/// Independent trajectories integrated concurrently; output order follows input.
pub fn integrate_batch(sys: &SphereSystem, starts: &[StateTS2], cfg: &IntegratorConfig) -> Vec<Result<Trajectory>> {
    starts.par_iter().map(|x| integrate_system(sys, x, cfg)).collect()
}

/// Trajectory of the bracket's Hamiltonian field `dx/dtau = g rhs(x)`, with
/// physical time co-integrated as `dt/dtau = g(gamma)`.
#[derive(Clone, Debug)]
pub struct ReparamTrajectory {
    pub tau: Vec<f64>,
    /// Physical time at each `tau` sample.
    pub t: Vec<f64>,
    pub states: Vec<StateTS2>,
    pub stats: StepStats,
}

/// `cfg.horizon` is the `tau` horizon.
pub fn integrate_reparametrized(
    sys: &SphereSystem,
    x0: &StateTS2,
    cfg: &IntegratorConfig,
) -> Result<ReparamTrajectory> {
    let mut y0 = [0.0; 7];
    y0[..6].copy_from_slice(&x0.to_array());
    let sol = integrate(
        |_, y: &[f64; 7]| {
            let x = StateTS2::from_array(&[y[0], y[1], y[2], y[3], y[4], y[5]]);
            let g = sys.g_value(x.gamma)?;
            let r = rhs_array(sys, &x)?;
            Ok(std::array::from_fn(|i| if i < 6 { g * r[i] } else { g }))
        },
        y0,
        cfg,
        |_| {},
    )?;
    Ok(ReparamTrajectory {
        tau: sol.times,
        t: sol.states.iter().map(|y| y[6]).collect(),
        states: sol.states.iter().map(|y| StateTS2::from_array(&[y[0], y[1], y[2], y[3], y[4], y[5]])).collect(),
        stats: sol.stats,
    })
}

/// A `tau` horizon long enough to reach physical time `t_target`, using the
/// minimum of `g` over a probe grid of the unit sphere.
pub fn tau_horizon_for(sys: &SphereSystem, t_target: f64) -> Result<f64> {
    let mut g_min = f64::INFINITY;
    for p in sampling::fibonacci_sphere(2000) {
        g_min = g_min.min(sys.g_value(p)?);
    }
    Ok(1.05 * t_target / g_min)
}

/// Sup-norm deviation on `[0, t_horizon]` between a direct run and a
/// reparametrized run mapped back to physical time, the direct run being
/// Hermite-interpolated at the physical times of the `tau` samples.
pub fn reparametrization_deviation(
    sys: &SphereSystem,
    x0: &StateTS2,
    t_horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let samples = (400.0 * t_horizon).ceil() as usize + 1;
    let direct = integrate_system(sys, x0, &cfg.clone().with_horizon(t_horizon).with_samples(samples))?;
    let tau_cfg = cfg.clone().with_horizon(tau_horizon_for(sys, t_horizon)?).with_samples(samples);
    let rep = integrate_reparametrized(sys, x0, &tau_cfg)?;
    if *rep.t.last().unwrap_or(&0.0) < t_horizon {
        return Err(Error::Domain("reparametrized run did not reach the physical horizon".into()));
    }
    let mut worst = 0.0f64;
    for (t, x) in rep.t.iter().zip(&rep.states) {
        if *t > t_horizon {
            break;
        }
        let d = direct.interpolate(*t)?;
        let a = d.to_array();
        let b = x.to_array();
        worst = worst.max((0..6).fold(0.0, |m, i| m.max((a[i] - b[i]).abs())));
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftEntry {
    pub name: String,
    pub initial: f64,
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub entries: Vec<DriftEntry>,
    pub max_drift: f64,
}

impl DriftReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.drift)
    }
}

/// Relative drift `sup |F(t) - F(0)| / max(1, |F(0)|)` of every integral
/// (`H`, `F1`, `F2` and registered extras) along a series of values.
pub fn drift_of(series: &[IntegralValues]) -> DriftReport {
    let Some(first) = series.first() else {
        return DriftReport {
            entries: Vec::new(),
            max_drift: 0.0,
        };
    };
    let names = first.named();
    let entries: Vec<DriftEntry> = names
        .iter()
        .enumerate()
        .map(|(k, (name, f0))| {
            let scale = f0.abs().max(1.0);
            let drift = series
                .iter()
                .map(|v| {
                    let fk = v.named()[k].1;
                    (fk - f0).abs() / scale
                })
                .fold(0.0, |m: f64, d| if d.is_nan() { f64::NAN } else { m.max(d) });
            DriftEntry {
                name: name.clone(),
                initial: *f0,
                drift,
            }
        })
        .collect();
    let max_drift = entries.iter().map(|e| e.drift).fold(0.0, f64::max);
    DriftReport { entries, max_drift }
}

pub fn drift_report(traj: &Trajectory) -> DriftReport {
    drift_of(&traj.integrals)
}

/// CSV with header `t,M1,M2,M3,g1,g2,g3,H,F1,F2[,extras]`, 17 significant digits.
pub fn write_csv(traj: &Trajectory, mut w: impl Write) -> Result<()> {
    let mut header = String::from("t,M1,M2,M3,g1,g2,g3,H,F1,F2");
    if let Some(first) = traj.integrals.first() {
        for (name, _) in &first.extras {
            header.push(',');
            header.push_str(name);
        }
    }
    writeln!(w, "{header}")?;
    for ((t, x), iv) in traj.times.iter().zip(&traj.states).zip(&traj.integrals) {
        let mut row = format!("{t:.16e}");
        let values = x.to_array().into_iter().chain(iv.named().into_iter().map(|(_, v)| v));
        for v in values {
            row.push_str(&format!(",{v:.16e}"));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// A sampled planar trajectory in `(q, P)`.
#[derive(Clone, Debug)]
pub struct PlanarTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<PlanarState>,
    pub energies: Vec<f64>,
    pub stats: StepStats,
}

impl PlanarTrajectory {
    /// `sup |E(t) - E(0)| / max(1, |E(0)|)`
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies.iter().map(|e| (e - e0).abs() / e0.abs().max(1.0)).fold(0.0, f64::max)
    }
}

pub fn integrate_planar(sys: &PlanarSystem, s0: &PlanarState, cfg: &IntegratorConfig) -> Result<PlanarTrajectory> {
    let sol = integrate(|_, y: &[f64; 4]| Ok(planar_rhs(sys, &PlanarState::from_array(y))), s0.to_array(), cfg, |_| {})?;
    let states: Vec<PlanarState> = sol.states.iter().map(PlanarState::from_array).collect();
    let energies = states.iter().map(|s| sys.energy(s)).collect();
    Ok(PlanarTrajectory {
        times: sol.times,
        states,
        energies,
        stats: sol.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{constant, Vec3};
    use crate::models::{ball_system, BallParams};
    use crate::sphere::{QuadraticHamiltonian, SFunctionSpec};
    use std::sync::Arc;

    fn free_top(g: f64) -> SphereSystem {
        let ham = Arc::new(QuadraticHamiltonian {
            inertia_inv: Vec3::new(1.0, 1.0, 1.0),
            potential: None,
        });
        let spec = SFunctionSpec::Reduced {
            g: constant(g),
            f: constant(0.0),
            phi: constant(0.0),
        };
        SphereSystem::new("free-top", ham, spec, Vec3::ZERO).unwrap()
    }

    fn start() -> StateTS2 {
        StateTS2::new(Vec3::new(0.3, -0.5, 0.9), Vec3::new(0.0, 0.6, 0.8))
    }

    #[test]
    fn free_top_keeps_momentum() {
        let sys = free_top(1.0);
        let traj = integrate_system(&sys, &start(), &IntegratorConfig::default()).unwrap();
        for x in &traj.states {
            assert!((x.m - start().m).max_abs() < 1e-12);
        }
        // Unprojected DP5 at rtol 1e-10 accumulates about 1.5e-9 here; the
        // drift scales linearly with the tolerance.
        let drift = |cfg: IntegratorConfig| {
            let traj = integrate_system(&sys, &start(), &cfg).unwrap();
            traj.states.iter().map(|x| (x.gamma.norm_squared() - 1.0).abs()).fold(0.0, f64::max)
        };
        let d10 = drift(IntegratorConfig::default());
        let d12 = drift(IntegratorConfig::default().with_tolerances(1e-12, 1e-14));
        assert!(d10 < 2e-9, "{d10:e}");
        assert!(d12 < 1e-10, "{d12:e}");
        let projected = drift(IntegratorConfig {
            project_gamma: true,
            ..IntegratorConfig::default()
        });
        // Samples come from dense output between projected steps.
        assert!(projected < 1e-11, "{projected:e}");
    }

    #[test]
    fn constant_g_time_map() {
        let sys = free_top(2.0);
        let cfg = IntegratorConfig::default().with_horizon(5.0).with_samples(51);
        let rep = integrate_reparametrized(&sys, &start(), &cfg).unwrap();
        for (tau, t) in rep.tau.iter().zip(&rep.t) {
            assert!((t - 2.0 * tau).abs() < 1e-12);
        }
        let unit = integrate_reparametrized(&free_top(1.0), &start(), &cfg).unwrap();
        let direct = integrate_system(&free_top(1.0), &start(), &cfg).unwrap();
        // Same field, but the appended time component changes the step sequence.
        for (a, b) in unit.states.iter().zip(&direct.states) {
            assert!((a.m - b.m).max_abs() + (a.gamma - b.gamma).max_abs() < 1e-9);
        }
    }

    #[test]
    fn ball_integrals_are_conserved() {
        let sys = ball_system(&BallParams::default()).unwrap();
        let traj = integrate_system(&sys, &start(), &IntegratorConfig::default()).unwrap();
        let report = drift_report(&traj);
        assert!(report.max_drift <= 1e-8, "{report:?}");
        assert!(report.get("M2").is_some());
    }

    #[test]
    fn coarse_run_shows_drift() {
        let sys = ball_system(&BallParams::default()).unwrap();
        let cfg = IntegratorConfig::default().with_tolerances(1e-4, 1e-4);
        let traj = integrate_system(&sys, &start(), &cfg).unwrap();
        assert!(drift_report(&traj).max_drift > 1e-5);
    }

    #[test]
    fn constant_trajectory_has_zero_drift() {
        let v = IntegralValues {
            f1: 1.0,
            f2: 0.5,
            f3: 2.0,
            extras: vec![("M2".into(), 3.0)],
        };
        let r = drift_of(&[v.clone(), v.clone(), v]);
        assert_eq!(r.max_drift, 0.0);
        assert_eq!(r.entries.len(), 4);
    }

    #[test]
    fn csv_layout() {
        let sys = ball_system(&BallParams::default()).unwrap();
        let cfg = IntegratorConfig::default().with_horizon(1.0).with_samples(3);
        let traj = integrate_system(&sys, &start(), &cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,M1,M2,M3,g1,g2,g3,H,F1,F2,M2");
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row.len(), 11);
        assert_eq!(row[1], 0.3);
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn reparametrized_ball_matches_direct() {
        let sys = ball_system(&BallParams::default()).unwrap();
        let d = reparametrization_deviation(&sys, &start(), 10.0, &IntegratorConfig::default()).unwrap();
        assert!(d <= 1e-6, "{d:e}");
    }
}
