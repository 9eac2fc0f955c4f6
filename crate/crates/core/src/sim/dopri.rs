//! Dormand-Prince 5(4) with step-size control and the standard continuous
//! extension of order four.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Error estimate: fifth-order weights minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step; `None` means the horizon.
    pub max_step: Option<f64>,
    pub horizon: f64,
    /// Number of equally spaced output samples, endpoints included.
    pub samples: usize,
    pub max_steps: usize,
    /// Renormalize `gamma` after every accepted step (sphere systems only).
    pub project_gamma: bool,
}

fn default_max_steps() -> usize {
    5_000_000
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: None,
            horizon: 100.0,
            samples: 1001,
            max_steps: default_max_steps(),
            project_gamma: false,
        }
    }
}

impl IntegratorConfig {
    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Config(format!("tolerances must be positive (rtol {}, atol {})", self.rtol, self.atol)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.samples < 2 {
            return Err(Error::Config("at least two output samples are required".into()));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::Config(format!("max step must be positive, got {h}")));
            }
        }
        Ok(())
    }

    /// Output sample times `0, horizon/(n-1), ..., horizon`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = self.samples - 1;
        (0..=n).map(|i| if i == n { self.horizon } else { self.horizon * i as f64 / n as f64 }).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Samples of an integration at the configured output times.
#[derive(Clone, Debug)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub stats: StepStats,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn error_norm<const N: usize>(y: &[f64; N], y_new: &[f64; N], err: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    (0..N)
        .map(|i| (err[i] / (cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs()))).abs())
        .fold(0.0, f64::max)
}

fn check<const N: usize>(v: [f64; N], t: f64) -> Result<[f64; N]> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::non_finite(format!("right-hand side at t = {t}")))
    }
}

/// Integrates `y' = f(t, y)` from `t = 0` to the horizon, reporting the state
/// at the configured sample times through dense output. `post_step` may modify
/// each accepted state (used for optional projection).
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    y0: [f64; N],
    cfg: &IntegratorConfig,
    mut post_step: impl FnMut(&mut [f64; N]),
) -> Result<Solution<N>> {
    cfg.validate()?;
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::non_finite("initial state"));
    }
    let out_times = cfg.sample_times();
    let t_end = cfg.horizon;
    let h_max = cfg.max_step.unwrap_or(t_end).min(t_end);
    let mut stats = StepStats::default();
    let mut eval = |t: f64, y: &[f64; N], stats: &mut StepStats| -> Result<[f64; N]> {
        stats.evaluations += 1;
        check(f(t, y)?, t)
    };

    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = eval(t, &y, &mut stats)?;
    let mut h = initial_step(&mut eval, &y, &k1, cfg, h_max, &mut stats)?;
    let mut times = Vec::with_capacity(out_times.len());
    let mut states = Vec::with_capacity(out_times.len());
    times.push(0.0);
    states.push(y);
    let mut next_out = 1;
    let mut last_rejected = false;

    while next_out < out_times.len() {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::TooManySteps(cfg.max_steps));
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::StepUnderflow { t, h, last: y.to_vec() });
        }
        let final_step = t + h >= t_end;
        if final_step {
            h = t_end - t;
        }
        let k2 = eval(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]), &mut stats)?;
        let k3 = eval(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]), &mut stats)?;
        let k4 = eval(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]), &mut stats)?;
        let k5 = eval(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]), &mut stats)?;
        let k6 = eval(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            &mut stats,
        )?;
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if final_step { t_end } else { t + h };
        let k7 = eval(t_new, &y_new, &mut stats)?;
        let err: [f64; N] =
            std::array::from_fn(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]));
        let e = error_norm(&y, &y_new, &err, cfg);

        if e <= 1.0 {
            stats.accepted += 1;
            // Dense output on [t, t_new].
            let rc2: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let rc3: [f64; N] = std::array::from_fn(|i| h * k1[i] - rc2[i]);
            let rc4: [f64; N] = std::array::from_fn(|i| rc2[i] - h * k7[i] - rc3[i]);
            let rc5: [f64; N] = std::array::from_fn(|i| {
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            });
            while next_out < out_times.len() && out_times[next_out] <= t_new {
                let to = out_times[next_out];
                let s = if to == t_new {
                    y_new
                } else {
                    let th = (to - t) / h;
                    let th1 = 1.0 - th;
                    std::array::from_fn(|i| y[i] + th * (rc2[i] + th1 * (rc3[i] + th * (rc4[i] + th1 * rc5[i]))))
                };
                times.push(to);
                states.push(s);
                next_out += 1;
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            let before = y;
            post_step(&mut y);
            if y != before {
                k1 = eval(t, &y, &mut stats)?;
            }
            let factor = (0.9 * e.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            let factor = if last_rejected { factor.min(1.0) } else { factor };
            h = (h * factor).min(h_max);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let factor = (0.9 * e.powf(-0.2)).clamp(0.2, 1.0);
            h *= factor;
            last_rejected = true;
        }
    }
    Ok(Solution { times, states, stats })
}

fn initial_step<const N: usize>(
    eval: &mut impl FnMut(f64, &[f64; N], &mut StepStats) -> Result<[f64; N]>,
    y: &[f64; N],
    f0: &[f64; N],
    cfg: &IntegratorConfig,
    h_max: f64,
    stats: &mut StepStats,
) -> Result<f64> {
    let sc: [f64; N] = std::array::from_fn(|i| cfg.atol + cfg.rtol * y[i].abs());
    let rms = |v: &[f64; N]| ((0..N).map(|i| (v[i] / sc[i]).powi(2)).sum::<f64>() / N as f64).sqrt();
    let (d0, d1) = (rms(y), rms(f0));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(h_max);
    let y1 = axpy(y, h0, &[(1.0, f0)]);
    let f1 = eval(h0, &y1, stats)?;
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    Ok((100.0 * h0).min(h1).min(h_max))
}

/// Cubic Hermite interpolation between `(t0, y0, d0)` and `(t1, y1, d1)`.
pub fn hermite<const N: usize>(
    t0: f64,
    y0: &[f64; N],
    d0: &[f64; N],
    t1: f64,
    y1: &[f64; N],
    d1: &[f64; N],
    t: f64,
) -> [f64; N] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    std::array::from_fn(|i| h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let cfg = IntegratorConfig::default().with_horizon(1.0).with_samples(11);
        let sol = integrate(|_, y: &[f64; 1]| Ok([y[0]]), [1.0], &cfg, |_| {}).unwrap();
        let end = sol.states.last().unwrap()[0];
        assert!((end / std::f64::consts::E - 1.0).abs() < 1e-9);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] / t.exp() - 1.0).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let cfg = IntegratorConfig::default().with_horizon(20.0).with_samples(2001);
        let sol = integrate(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), [1.0, 0.0], &cfg, |_| {}).unwrap();
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - t.cos()).abs() < 1e-8);
        }
        assert!(sol.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn blow_up_underflows() {
        let cfg = IntegratorConfig::default().with_horizon(2.0);
        let err = integrate(|_, y: &[f64; 1]| Ok([y[0] * y[0]]), [1.0], &cfg, |_| {}).unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { .. } | Error::NonFinite { .. }), "{err}");
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig {
            rtol: 0.0,
            ..IntegratorConfig::default()
        };
        assert!(matches!(integrate(|_, y: &[f64; 1]| Ok(*y), [1.0], &cfg, |_| {}), Err(Error::Config(_))));
    }

    #[test]
    fn hermite_is_exact_for_cubics() {
        let p = |t: f64| t * t * t - 2.0 * t + 1.0;
        let dp = |t: f64| 3.0 * t * t - 2.0;
        let v = hermite(0.5, &[p(0.5)], &[dp(0.5)], 1.5, &[p(1.5)], &[dp(1.5)], 0.8);
        assert!((v[0] - p(0.8)).abs() < 1e-14);
    }
}
