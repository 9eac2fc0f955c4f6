//! The `nonholo` command-line tool.
//!
//! Exit codes: 0 pass, 2 configuration error, 3 domain error, 4 numerical
//! tolerance failure. Reports go to stdout as JSON, diagnostics to stderr.

mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use config::{demo_initial, normalize_gamma, InitialCondition, OutputPaths, RunConfig, GAMMA_WARN, SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::gauge::{reduction_report, GFParams, ReductionReport, ReportProbes, DEFAULT_BAND_LIMIT};
use crate::math::{constant, Mat3, Vec3};
use crate::models::{ModelConfig, Potential, VeselovaParams};
use crate::sim::{self, DriftReport, IntegratorConfig, StepStats};
use crate::tolerance::Tolerances;
use crate::verify::{self, SuiteReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "NONHOLO_THREADS";

/// Maps a library error onto the exit-code contract.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::Unsupported(_) => EXIT_CONFIG,
        Error::Domain(_) | Error::Precondition(_) | Error::MeasureViolated { .. } => EXIT_DOMAIN,
        Error::NonFinite { .. } | Error::StepUnderflow { .. } | Error::TooManySteps(_) | Error::Tolerance { .. } => {
            EXIT_TOLERANCE
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "nonholo", version, about = "Conformally Hamiltonian nonholonomic systems: simulation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a model and write a trajectory CSV and a drift report.
    Simulate(SimulateArgs),
    /// Run a seeded verification suite.
    Check(CheckArgs),
    /// Construct the gauge taking a bracket to e(3) and measure the result.
    Reduce(ReduceArgs),
    /// Run the planar two-degree-of-freedom demo system.
    PlanarDemo(PlanarArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelName {
    Ball,
    Veselova,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PotentialKind {
    Zero,
    /// `(r, gamma)`, `r` from `--r` (default `0,0,1`).
    Linear,
    /// `(gamma, C gamma)`, `C` from `--C` (default `diag(0.1,0.2,0.3)`).
    Quadratic,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    /// Gyrostatic momentum `k1,k2,k3`.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    gyrostat: Option<[f64; 3]>,
    /// Potential from the built-in catalogue.
    #[arg(long = "U", value_enum)]
    potential: Option<PotentialKind>,
    /// Vector of the linear potential.
    #[arg(long = "r", value_parser = parse_vec3, allow_hyphen_values = true)]
    linear_r: Option<[f64; 3]>,
    /// Symmetric matrix of the quadratic potential, nine values by rows.
    #[arg(long = "C", value_parser = parse_mat3, allow_hyphen_values = true)]
    quadratic_c: Option<Mat3>,
    /// Diagonal of the ball matrix `A`.
    #[arg(long = "A", value_parser = parse_vec3, allow_hyphen_values = true)]
    ball_a: Option<[f64; 3]>,
    /// Ball parameter `D`; for `check duality` the duality parameter.
    #[arg(long = "D", allow_hyphen_values = true)]
    d: Option<f64>,
    /// Diagonal of the Veselova inverse inertia.
    #[arg(long = "Ahat", value_parser = parse_vec3, allow_hyphen_values = true)]
    ahat: Option<[f64; 3]>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the built-in demo initial condition.
    #[arg(long)]
    demo: bool,
    /// Initial momentum.
    #[arg(long = "M", value_parser = parse_vec3, allow_hyphen_values = true)]
    m: Option<[f64; 3]>,
    /// Initial angular velocity, converted to momentum for the chosen model.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, conflicts_with = "m")]
    omega: Option<[f64; 3]>,
    /// Initial direction; renormalized if needed.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    gamma: Option<[f64; 3]>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Renormalize gamma after every step.
    #[arg(long)]
    project_gamma: bool,
    /// Largest relative drift that still counts as a pass.
    #[arg(long)]
    drift_tol: Option<f64>,
    /// Directory for default output names.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Jacobi,
    Measure,
    Conformal,
    Duality,
    Gauge,
    Planar,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[command(flatten)]
    model: ModelArgs,
    /// Number of probe states.
    #[arg(short = 'n', long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the mismatched-measure control instead (jacobi only).
    #[arg(long)]
    negative_control: bool,
    /// Also write the report to this file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Constant `g`; selects the constant-parameter bracket instead of a model.
    #[arg(long = "g", allow_hyphen_values = true)]
    g: Option<f64>,
    /// Constant `f`.
    #[arg(long = "f", allow_hyphen_values = true)]
    f: Option<f64>,
    /// Spherical-harmonic band limit.
    #[arg(long = "L", default_value_t = DEFAULT_BAND_LIMIT)]
    band_limit: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probe points for the `g~` and `f~` deviations.
    #[arg(long, default_value_t = ReportProbes::default().grid_points)]
    points: usize,
    /// Random states for the bracket deviation.
    #[arg(long, default_value_t = ReportProbes::default().bracket_states)]
    states: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlanarArgs {
    #[arg(short = 'n', long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100.0)]
    horizon: f64,
    /// Write the trajectory `t,q1,q2,P1,P2,H` here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", parts.len()));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        let v: f64 = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
        if !v.is_finite() {
            return Err(format!("'{p}' is not finite"));
        }
        *slot = v;
    }
    Ok(out)
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    parse_floats::<3>(s)
}

fn parse_mat3(s: &str) -> std::result::Result<Mat3, String> {
    let v = parse_floats::<9>(s)?;
    Ok(Mat3([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]]))
}

impl ModelArgs {
    /// Applies the flags on top of `base`. `--D` is left alone when it means
    /// the duality parameter.
    fn apply(&self, base: ModelConfig, d_is_model: bool) -> Result<ModelConfig> {
        let mut model = match self.model {
            Some(ModelName::Ball) if base.kind() != "ball" => ModelConfig::by_name("ball").expect("built-in"),
            Some(ModelName::Veselova) if base.kind() != "veselova" => {
                ModelConfig::by_name("veselova").expect("built-in")
            }
            _ => base,
        };
        if let Some(k) = self.gyrostat {
            model.set_gyrostat(k);
        }
        if let Some(u) = self.potential()? {
            model.set_potential(u);
        }
        match &mut model {
            ModelConfig::Ball(p) => {
                if let Some(a) = self.ball_a {
                    p.a = a;
                }
                if d_is_model {
                    if let Some(d) = self.d {
                        p.d = d;
                    }
                }
                if self.ahat.is_some() {
                    return Err(Error::Config("--Ahat applies to the veselova model only".into()));
                }
            }
            ModelConfig::Veselova(p) => {
                if let Some(a) = self.ahat {
                    p.ahat = a;
                }
                if self.ball_a.is_some() || (d_is_model && self.d.is_some()) {
                    return Err(Error::Config("--A and --D apply to the ball model only".into()));
                }
            }
        }
        Ok(model)
    }

    fn potential(&self) -> Result<Option<Potential>> {
        let kind = match self.potential {
            Some(k) => k,
            None if self.linear_r.is_some() => PotentialKind::Linear,
            None if self.quadratic_c.is_some() => PotentialKind::Quadratic,
            None => return Ok(None),
        };
        Ok(Some(match kind {
            PotentialKind::Zero => Potential::Zero,
            PotentialKind::Linear => Potential::linear(Vec3::from_array(self.linear_r.unwrap_or([0.0, 0.0, 1.0]))),
            PotentialKind::Quadratic => Potential::quadratic(
                self.quadratic_c.unwrap_or(Mat3([[0.1, 0.0, 0.0], [0.0, 0.2, 0.0], [0.0, 0.0, 0.3]])),
            )?,
        }))
    }
}

/// Pretty JSON with a trailing newline; field order is fixed by the types,
/// so equal inputs give identical bytes.
fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn emit<T: Serialize>(value: &T, file: Option<&Path>) -> Result<()> {
    let text = to_json(value)?;
    if let Some(path) = file {
        std::fs::write(path, &text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    print!("{text}");
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    schema_version: u32,
    command: &'static str,
    system: &'a str,
    model: &'a ModelConfig,
    seed: u64,
    initial: InitialState,
    integrator: &'a IntegratorConfig,
    stats: StepStats,
    csv: String,
    drift: DriftReport,
    drift_tolerance: f64,
    warnings: Vec<String>,
    pass: bool,
}

#[derive(Serialize)]
struct InitialState {
    m: [f64; 3],
    gamma: [f64; 3],
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.model = args.model.apply(cfg.model, true)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.demo {
        cfg.initial = Some(demo_initial());
    }
    let gamma = args.gamma.or(match &cfg.initial {
        Some(InitialCondition::Momentum { gamma, .. } | InitialCondition::Velocity { gamma, .. }) => Some(*gamma),
        None => None,
    });
    match (args.m, args.omega, gamma) {
        (Some(m), _, Some(gamma)) => cfg.initial = Some(InitialCondition::Momentum { m, gamma }),
        (_, Some(omega), Some(gamma)) => cfg.initial = Some(InitialCondition::Velocity { omega, gamma }),
        (Some(_), _, None) | (_, Some(_), None) => {
            return Err(Error::Config("--M or --omega needs --gamma".into()));
        }
        (None, None, Some(gamma)) => match &mut cfg.initial {
            Some(InitialCondition::Momentum { gamma: g, .. } | InitialCondition::Velocity { gamma: g, .. }) => *g = gamma,
            None => return Err(Error::Config("--gamma needs --M or --omega".into())),
        },
        (None, None, None) => {}
    }
    let ic = &mut cfg.integrator;
    if let Some(v) = args.rtol {
        ic.rtol = v;
    }
    if let Some(v) = args.atol {
        ic.atol = v;
    }
    if let Some(v) = args.horizon {
        ic.horizon = v;
    }
    if let Some(v) = args.samples {
        ic.samples = v;
    }
    ic.project_gamma |= args.project_gamma;
    if let Some(v) = args.drift_tol {
        cfg.drift_tolerance = v;
    }
    if let Some(p) = &args.csv {
        cfg.output.csv = Some(p.clone());
    }
    if let Some(p) = &args.report {
        cfg.output.report = Some(p.clone());
    }
    if !(cfg.drift_tolerance > 0.0) {
        return Err(Error::Config("drift tolerance must be positive".into()));
    }
    cfg.integrator.validate()?;

    let sys = cfg.model.system()?;
    let (x0, warnings) = cfg.initial_state()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let traj = sim::integrate_system(&sys, &x0, &cfg.integrator)?;
    let drift = sim::drift_report(&traj);

    let csv_path = cfg.output.csv.clone().unwrap_or_else(|| args.out_dir.join(format!("{}.csv", sys.name)));
    let report_path = cfg
        .output
        .report
        .clone()
        .unwrap_or_else(|| args.out_dir.join(format!("{}_drift.json", sys.name)));
    let mut w = create(&csv_path)?;
    sim::write_csv(&traj, &mut w)?;
    w.flush()?;

    let pass = drift.max_drift <= cfg.drift_tolerance;
    let report = SimulateReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        system: &sys.name,
        model: &cfg.model,
        seed: cfg.seed,
        initial: InitialState {
            m: x0.m.to_array(),
            gamma: x0.gamma.to_array(),
        },
        integrator: &cfg.integrator,
        stats: traj.stats,
        csv: csv_path.display().to_string(),
        drift,
        drift_tolerance: cfg.drift_tolerance,
        warnings,
        pass,
    };
    emit(&report, Some(&report_path))?;
    if !pass {
        eprintln!(
            "drift {:e} exceeds {:e}; tighten --rtol/--atol",
            report.drift.max_drift, cfg.drift_tolerance
        );
    }
    Ok(if pass { EXIT_PASS } else { EXIT_TOLERANCE })
}

#[derive(Serialize)]
struct CheckReport {
    schema_version: u32,
    command: &'static str,
    #[serde(flatten)]
    report: SuiteReport,
}

fn cmd_check(args: &CheckArgs) -> Result<i32> {
    if args.negative_control && args.suite != Suite::Jacobi {
        return Err(Error::Config("--negative-control applies to the jacobi suite only".into()));
    }
    let default_n = match args.suite {
        Suite::Gauge => 200,
        Suite::Planar => 100,
        _ => 1000,
    };
    let n = args.n.unwrap_or(default_n);
    if n == 0 {
        return Err(Error::Config("-n must be positive".into()));
    }
    let seed = args.seed;
    let model = || -> Result<_> { args.model.apply(ModelConfig::by_name("ball").expect("built-in"), true)?.system() };
    let report = match args.suite {
        Suite::Jacobi if args.negative_control => verify::negative_control_suite(n, seed)?,
        Suite::Jacobi => verify::jacobi_suite(&model()?, n, seed)?,
        Suite::Measure => verify::measure_suite(&model()?, n, seed)?,
        Suite::Conformal => verify::conformal_suite(&model()?, n, seed)?,
        Suite::Duality => {
            if args.model.model == Some(ModelName::Ball) || args.model.ball_a.is_some() {
                return Err(Error::Config("duality takes Veselova parameters (--Ahat, --U); the ball is derived".into()));
            }
            let vp = match args.model.apply(ModelConfig::Veselova(VeselovaParams::default()), false)? {
                ModelConfig::Veselova(p) => p,
                ModelConfig::Ball(_) => unreachable!("duality model is forced to veselova"),
            };
            verify::duality_suite(&vp, args.model.d.unwrap_or(1.0), n, seed)?
        }
        Suite::Gauge => verify::gauge_suite(n, seed)?,
        Suite::Planar => verify::planar_suite(n, seed, 100.0)?,
    };
    let pass = report.pass;
    for m in report.metrics.iter().filter(|m| !m.pass) {
        eprintln!(
            "{}: {} = {:e} {} {:e}",
            report.suite,
            m.name,
            m.value,
            if m.upper_bound { "exceeds" } else { "falls short of" },
            m.threshold
        );
    }
    emit(
        &CheckReport {
            schema_version: SCHEMA_VERSION,
            command: "check",
            report,
        },
        args.json.as_deref(),
    )?;
    Ok(if pass { EXIT_PASS } else { EXIT_TOLERANCE })
}

#[derive(Serialize)]
struct ReduceOutput {
    schema_version: u32,
    command: &'static str,
    source: String,
    seed: u64,
    #[serde(flatten)]
    report: ReductionReport,
    warning: Option<String>,
    pass: bool,
}

fn cmd_reduce(args: &ReduceArgs) -> Result<i32> {
    let (source, params) = if args.g.is_some() || args.f.is_some() {
        let (g, f) = (args.g.unwrap_or(1.0), args.f.unwrap_or(0.0));
        if !g.is_finite() || !f.is_finite() {
            return Err(Error::Config("--g and --f must be finite".into()));
        }
        (format!("constant g = {g}, f = {f}"), GFParams::new(constant(g), constant(f))?)
    } else {
        let sys = args.model.apply(ModelConfig::by_name("ball").expect("built-in"), true)?.system()?;
        (sys.name.clone(), GFParams::from_system(&sys)?)
    };
    if args.band_limit == 0 || args.points == 0 || args.states == 0 {
        return Err(Error::Config("--L, --points and --states must be positive".into()));
    }
    let probes = ReportProbes {
        grid_points: args.points,
        bracket_states: args.states,
        seed: args.seed,
    };
    let (reduction, report) = reduction_report(&params, args.band_limit, probes)?;
    let tol = Tolerances::default();
    let warning = reduction.solution.warning.clone();
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }
    let pass = report.residual <= tol.curl_residual && report.bracket_dev <= tol.bracket;
    if report.bracket_dev > tol.bracket {
        eprintln!("bracket deviation {:e} exceeds {:e}", report.bracket_dev, tol.bracket);
    }
    emit(
        &ReduceOutput {
            schema_version: SCHEMA_VERSION,
            command: "reduce",
            source,
            seed: args.seed,
            report,
            warning,
            pass,
        },
        args.json.as_deref(),
    )?;
    Ok(if pass { EXIT_PASS } else { EXIT_TOLERANCE })
}

fn cmd_planar(args: &PlanarArgs) -> Result<i32> {
    if !(args.horizon > 0.0) || args.n == 0 {
        return Err(Error::Config("--horizon and -n must be positive".into()));
    }
    if let Some(path) = &args.csv {
        let sys = crate::planar::demo_system();
        let cfg = IntegratorConfig::default().with_horizon(args.horizon);
        let traj = sim::integrate_planar(&sys, &verify::planar_demo_state(), &cfg)?;
        let mut w = create(path)?;
        writeln!(w, "t,q1,q2,P1,P2,H")?;
        for ((t, s), e) in traj.times.iter().zip(&traj.states).zip(&traj.energies) {
            writeln!(
                w,
                "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{e:.16e}",
                s.q[0], s.q[1], s.momenta[0], s.momenta[1]
            )?;
        }
        w.flush()?;
    }
    let report = verify::planar_suite(args.n, args.seed, args.horizon)?;
    let pass = report.pass;
    emit(
        &CheckReport {
            schema_version: SCHEMA_VERSION,
            command: "planar-demo",
            report,
        },
        args.json.as_deref(),
    )?;
    Ok(if pass { EXIT_PASS } else { EXIT_TOLERANCE })
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    // A pool that already exists (repeated in-process calls) is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Check(a) => cmd_check(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::PlanarDemo(a) => cmd_planar(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
