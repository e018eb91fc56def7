//! Command-line interface: argument definitions, the run configuration file
//! and one function per subcommand.
//!
//! Data goes to the files named by `--out` style flags (or stdout when a
//! command has no such flag set); human-readable summaries go to stderr.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{simulate_measurement, synthetic_properties, SyntheticMechanism};
use crate::identify::{identify_friction, DEFAULT_POSITION_FIT_DEGREE};
use crate::io::{self, PlantDoc, ProfileDocument, Provenance, SolverDoc, TaskDoc, PROFILE_SCHEMA};
use crate::optimize::{
    degree_sweep, saving_pct, GaOptions, OptimizationContext, SolverChoice, SolverResult, SolverSettings,
    DEFAULT_QUADRATURE_NODES,
};
use crate::plant::{
    energy_decomposition, fit_property_model, tau_rms, FrictionModel, MotorParams, PropertyModel, PropertySamples,
    DEFAULT_FIT_DEGREE,
};
use crate::profile::{polynomial_reference, JerkMode, MotionTask, ReferenceKind, RescaledPath, Trapezoid13};

#[derive(Debug, Parser)]
#[command(name = "chebmotion", version, about = "Energy-optimal rest-to-rest motion profiles for servo axes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write property samples (and optionally a measurement log) for a synthetic mechanism.
    Synth(SynthArgs),
    /// Estimate the viscous friction coefficient from a measurement log.
    Identify(IdentifyArgs),
    /// Optimize the motion profile for one degree, or sweep several.
    Optimize(OptimizeArgs),
    /// Compare torque and energy of the optimized profile against references.
    Compare(CompareArgs),
    /// Export a feedforward setpoint table and plot data for a profile.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismKind {
    Constant,
    SliderCrank,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "slider-crank")]
    pub mechanism: MechanismKind,
    /// Inertia of the constant mechanism, kg m^2.
    #[arg(long, default_value_t = 0.01)]
    pub inertia: f64,
    #[arg(long, default_value_t = 0.002)]
    pub crank_inertia: f64,
    #[arg(long, default_value_t = 1.0)]
    pub slider_mass: f64,
    #[arg(long, default_value_t = 0.05)]
    pub crank_radius: f64,
    #[arg(long, default_value_t = 0.2)]
    pub rod_length: f64,
    #[arg(long, default_value_t = 20.0)]
    pub load_force: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_b: f64,
    /// Angles are given in degrees.
    #[arg(long)]
    pub degrees: bool,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Property CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a simulated measurement of the minimal quintic move.
    #[arg(long)]
    pub measurement_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t_a: f64,
    /// Move duration for the simulated measurement, s.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub mu_v: f64,
    #[arg(long, default_value_t = 0.00025)]
    pub period: f64,
    /// Relative standard deviation of multiplicative torque noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    #[arg(long)]
    pub properties: PathBuf,
    #[arg(long)]
    pub measurement: PathBuf,
    /// Degree of the position polynomial.
    #[arg(long, default_value_t = DEFAULT_POSITION_FIT_DEGREE)]
    pub fit_degree: usize,
    /// Degree of the property fit.
    #[arg(long, default_value_t = DEFAULT_FIT_DEGREE)]
    pub property_fit_degree: usize,
    /// Motor parameter file; its rotor inertia is added to the load.
    #[arg(long)]
    pub motor: Option<PathBuf>,
    /// JSON result file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct OptimizeArgs {
    /// Run configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub properties: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_a: Option<f64>,
    /// Move duration, s.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Profile degree; a comma-separated list runs a degree sweep.
    #[arg(long, value_delimiter = ',')]
    pub degree: Vec<usize>,
    /// Also enforce zero jerk at both ends.
    #[arg(long)]
    pub jerk_zero: bool,
    /// Angles are given in degrees.
    #[arg(long)]
    pub degrees: bool,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quad_nodes: Option<usize>,
    #[arg(long)]
    pub fit_degree: Option<usize>,
    #[arg(long)]
    pub motor: Option<PathBuf>,
    #[arg(long)]
    pub mu_v: Option<f64>,
    /// Profile document to write; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sweep table CSV; stdout when absent in sweep mode.
    #[arg(long)]
    pub sweep_out: Option<PathBuf>,
    /// Store wall-clock times in the outputs (makes them non-reproducible).
    #[arg(long)]
    pub record_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Bfgs,
    Ga,
    Both,
}

impl From<SolverArg> for SolverChoice {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Bfgs => SolverChoice::Bfgs,
            SolverArg::Ga => SolverChoice::Ga,
            SolverArg::Both => SolverChoice::Both,
        }
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// Property CSV; defaults to the file recorded in the profile document.
    #[arg(long)]
    pub properties: Option<PathBuf>,
    #[arg(long)]
    pub motor: PathBuf,
    /// Overrides the friction recorded in the profile document.
    #[arg(long)]
    pub mu_v: Option<f64>,
    /// Comparison CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// Property CSV; defaults to the file recorded in the profile document.
    #[arg(long)]
    pub properties: Option<PathBuf>,
    /// Setpoint sample period, s.
    #[arg(long, default_value_t = 0.00025)]
    pub period: f64,
    /// Setpoint CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot CSV with x, theta, velocity, acceleration and torque columns.
    #[arg(long)]
    pub plot_out: Option<PathBuf>,
    #[arg(long, default_value_t = 501)]
    pub plot_points: usize,
}

/// Run configuration file. Every field is optional; flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default)]
    pub model: ModelConfig,
    pub motor: Option<MotorParams>,
    #[serde(default)]
    pub friction: FrictionConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub theta_a: Option<f64>,
    pub theta_b: Option<f64>,
    pub t_a: Option<f64>,
    pub dt: Option<f64>,
    pub degree: Option<usize>,
    /// Several degrees run a sweep; exclusive with `degree`.
    pub degrees: Option<Vec<usize>>,
    pub jerk_zero: Option<bool>,
    /// `rad` (default) or `deg`.
    pub angle_unit: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Relative paths are resolved against the configuration file.
    pub properties: Option<PathBuf>,
    pub fit_degree: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionConfig {
    pub mu_v: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub kind: Option<SolverArg>,
    pub seed: Option<u64>,
    pub quadrature_nodes: Option<usize>,
    pub ga: Option<GaOptions>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(p) = cfg.model.properties.as_mut() {
            if p.is_relative() {
                *p = path.parent().unwrap_or(Path::new("")).join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Fully validated optimize settings, recorded verbatim in the profile document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeSettings {
    pub properties: PathBuf,
    pub theta_a: f64,
    pub theta_b: f64,
    pub t_a: f64,
    pub dt: f64,
    pub degrees: Vec<usize>,
    pub jerk_mode: String,
    pub fit_degree: usize,
    pub mu_v: f64,
    pub motor: Option<MotorParams>,
    pub solver: SolverArg,
    pub seed: u64,
    pub quadrature_nodes: usize,
    pub ga: GaOptions,
}

impl OptimizeSettings {
    pub fn resolve(args: &OptimizeArgs) -> Result<(Self, RunConfig)> {
        let cfg = match &args.config {
            Some(p) => RunConfig::read(p)?,
            None => RunConfig::default(),
        };
        let missing = |what: &str| Error::Config(format!("missing {what} (flag or config file)"));
        let in_degrees = args.degrees
            || match cfg.task.angle_unit.as_deref() {
                None | Some("rad") => false,
                Some("deg") => true,
                Some(other) => return Err(Error::Config(format!("unknown angle unit `{other}`"))),
            };
        let angle = |v: f64| if in_degrees { v.to_radians() } else { v };
        let theta_a = angle(args.theta_a.or(cfg.task.theta_a).unwrap_or(0.0));
        let theta_b = angle(args.theta_b.or(cfg.task.theta_b).ok_or_else(|| missing("theta_b"))?);
        let t_a = args.t_a.or(cfg.task.t_a).unwrap_or(0.0);
        let dt = args.dt.or(cfg.task.dt).ok_or_else(|| missing("dt"))?;
        let degrees = if !args.degree.is_empty() {
            args.degree.clone()
        } else {
            match (cfg.task.degree, &cfg.task.degrees) {
                (Some(_), Some(_)) => return Err(Error::Config("set either task.degree or task.degrees".into())),
                (Some(d), None) => vec![d],
                (None, Some(ds)) => ds.clone(),
                (None, None) => return Err(missing("degree")),
            }
        };
        if degrees.is_empty() {
            return Err(missing("degree"));
        }
        let jerk_zero = args.jerk_zero || cfg.task.jerk_zero.unwrap_or(false);
        let mode = JerkMode::from_flag(jerk_zero);
        for &d in &degrees {
            MotionTask::new(theta_a, theta_b, t_a, t_a + dt, mode, d).map_err(|e| Error::Config(e.to_string()))?;
        }
        let properties = args.properties.clone().or(cfg.model.properties.clone()).ok_or_else(|| missing("properties"))?;
        let motor = match &args.motor {
            Some(p) => Some(io::read_motor_toml(p)?),
            None => cfg.motor,
        };
        if let Some(m) = &motor {
            m.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        let mu_v = args.mu_v.or(cfg.friction.mu_v).unwrap_or(0.0);
        FrictionModel::new(mu_v).map_err(|e| Error::Config(e.to_string()))?;
        let quadrature_nodes = args.quad_nodes.or(cfg.solver.quadrature_nodes).unwrap_or(DEFAULT_QUADRATURE_NODES);
        if quadrature_nodes < crate::optimize::MIN_QUADRATURE_NODES || quadrature_nodes % 2 == 0 {
            return Err(Error::Config(format!("quadrature nodes must be odd and >= 33, got {quadrature_nodes}")));
        }
        let ga = cfg.solver.ga.unwrap_or_default();
        ga.validate()?;
        let settings = Self {
            properties,
            theta_a,
            theta_b,
            t_a,
            dt,
            degrees,
            jerk_mode: mode.label().to_string(),
            fit_degree: args.fit_degree.or(cfg.model.fit_degree).unwrap_or(DEFAULT_FIT_DEGREE),
            mu_v,
            motor,
            solver: args.solver.or(cfg.solver.kind).unwrap_or(SolverArg::Bfgs),
            seed: args.seed.or(cfg.solver.seed).unwrap_or(0),
            quadrature_nodes,
            ga,
        };
        Ok((settings, cfg))
    }

    fn mode(&self) -> JerkMode {
        JerkMode::from_flag(self.jerk_mode == "J0")
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn build_model(samples: &PropertySamples, task: &MotionTask, fit_degree: usize, motor_inertia: f64) -> Result<PropertyModel> {
    fit_property_model(samples, task, fit_degree)?.with_motor_inertia(motor_inertia)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(&a),
        Command::Identify(a) => identify(&a),
        Command::Optimize(a) => optimize(&a),
        Command::Compare(a) => compare(&a),
        Command::Export(a) => export(&a),
    }
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let mech = match args.mechanism {
        MechanismKind::Constant => SyntheticMechanism::constant(args.inertia)?,
        MechanismKind::SliderCrank => SyntheticMechanism::SliderCrank {
            crank_inertia: args.crank_inertia,
            slider_mass: args.slider_mass,
            crank_radius: args.crank_radius,
            rod_length: args.rod_length,
            load_force: args.load_force,
        },
    };
    mech.validate()?;
    let angle = |v: f64| if args.degrees { v.to_radians() } else { v };
    let (a, b) = (angle(args.theta_a), angle(args.theta_b));
    let samples = synthetic_properties(&mech, (a.min(b), a.max(b)), args.samples)?;
    io::write_property_csv(&args.out, &samples)?;
    eprintln!("wrote {} property samples over [{}, {}] rad to {}", samples.len(), a.min(b), a.max(b), args.out.display());
    if let Some(path) = &args.measurement_out {
        let dt = args.dt.ok_or_else(|| Error::Config("--measurement-out needs --dt".into()))?;
        let task = MotionTask::new(a, b, args.t_a, args.t_a + dt, JerkMode::Free, 5)?;
        let log = simulate_measurement(&mech, &task, &FrictionModel::new(args.mu_v)?, args.period, args.noise, args.seed)?;
        io::write_measurement_csv(path, &log)?;
        eprintln!("wrote {} measurement rows to {}", log.len(), path.display());
    }
    Ok(())
}

pub fn identify(args: &IdentifyArgs) -> Result<()> {
    let samples = io::read_property_csv(&args.properties)?;
    let log = io::read_measurement_csv(&args.measurement)?;
    eprintln!("properties: {} rows over [{}, {}] rad", samples.len(), samples.range().0, samples.range().1);
    eprintln!("measurement: {} rows, step {} s", log.len(), log.step());
    let (lo, hi) = samples.range();
    let motor_inertia = match &args.motor {
        Some(p) => io::read_motor_toml(p)?.rotor_inertia,
        None => 0.0,
    };
    let model = PropertyModel::fit(&samples, crate::profile::ScaleFactors::for_positions(lo, hi)?, args.property_fit_degree)?
        .with_motor_inertia(motor_inertia)?;
    let est = identify_friction(&log, &model, args.fit_degree)?;
    eprintln!(
        "mu_v = {} N m s/rad; torque residual {} -> {} (signal {})",
        est.mu_v, est.residual_before, est.residual_after, est.signal_norm
    );
    let mut text = serde_json::to_string_pretty(&est).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    emit(args.out.as_deref(), &text)
}

fn solver_doc(r: &SolverResult, reference: f64, record_timing: bool) -> SolverDoc {
    SolverDoc {
        solver: r.solver.name().to_string(),
        tau_rms_nm: r.tau_rms,
        saving_pct: saving_pct(reference, r.tau_rms),
        iterations: r.iterations,
        objective_evals: r.objective_evals,
        converged: r.converged,
        wall_time_s: record_timing.then_some(r.wall_time),
    }
}

pub fn optimize(args: &OptimizeArgs) -> Result<()> {
    let (settings, _) = OptimizeSettings::resolve(args)?;
    let samples = io::read_property_csv(&settings.properties)?;
    eprintln!(
        "properties: {} rows over [{}, {}] rad",
        samples.len(),
        samples.range().0,
        samples.range().1
    );
    let mode = settings.mode();
    let task = MotionTask::new(
        settings.theta_a,
        settings.theta_b,
        settings.t_a,
        settings.t_a + settings.dt,
        mode,
        settings.degrees[0],
    )?;
    let motor_inertia = settings.motor.map_or(0.0, |m| m.rotor_inertia);
    let model = build_model(&samples, &task, settings.fit_degree, motor_inertia)?;
    let friction = FrictionModel::new(settings.mu_v)?;
    let ctx = OptimizationContext::new(task, model.clone(), friction, settings.motor, settings.quadrature_nodes)?;
    let solver_settings = SolverSettings { ga: settings.ga, seed: settings.seed, ..Default::default() };
    let table = degree_sweep(&ctx, &settings.degrees, settings.solver.into(), &solver_settings)?;

    for row in &table.rows {
        eprintln!(
            "{:>3} {} {:<9} tau_rms {:.6} N m  saving {:.2}%",
            row.degree,
            row.mode.label(),
            row.solver,
            row.tau_rms,
            row.saving_pct
        );
    }
    if settings.degrees.len() > 1 || args.sweep_out.is_some() {
        let csv = io::format_sweep_csv(&table, args.record_timing);
        match (&args.sweep_out, &args.out) {
            (Some(p), _) => fs::write(p, csv)?,
            (None, _) => std::io::stdout().write_all(csv.as_bytes())?,
        }
        if args.out.is_none() {
            return Ok(());
        }
    }

    let best = table.best().ok_or_else(|| Error::Internal("no solver result".into()))?;
    let reference = ReferenceKind::for_mode(mode);
    let doc = ProfileDocument {
        schema: PROFILE_SCHEMA.to_string(),
        task: TaskDoc::from_task(best.profile.task()),
        coefficients: best.profile.coeffs().to_vec(),
        free_coefficients: best.free_coeffs.clone(),
        reference: reference.name().to_string(),
        reference_tau_rms_nm: table.reference_tau_rms,
        solver: solver_doc(best, table.reference_tau_rms, args.record_timing),
        runs: table.results.iter().map(|r| solver_doc(r, table.reference_tau_rms, args.record_timing)).collect(),
        phi_range: {
            let (lo, hi) = best.profile.phi_range(2001);
            [lo, hi]
        },
        plant: PlantDoc {
            fit_degree: settings.fit_degree,
            inertia_fit_max_rel_residual: model.inertia_residual(),
            load_fit_max_abs_residual_nm: model.load_residual(),
            motor_inertia_kgm2: motor_inertia,
            mu_v: settings.mu_v,
            quadrature_nodes: settings.quadrature_nodes,
        },
        provenance: Provenance {
            tool: format!("chebmotion {}", env!("CARGO_PKG_VERSION")),
            properties_path: settings.properties.display().to_string(),
            properties_sha256: io::sha256_file(&settings.properties)?,
            config_path: args.config.as_ref().map(|p| p.display().to_string()),
            config_sha256: args.config.as_deref().map(io::sha256_file).transpose()?,
            motor_path: args.motor.as_ref().map(|p| p.display().to_string()),
            motor_sha256: args.motor.as_deref().map(io::sha256_file).transpose()?,
            seed: settings.seed,
            settings: serde_json::to_value(&settings).map_err(|e| Error::Internal(e.to_string()))?,
        },
    };
    if doc.phi_range[0] < -1.0 - 1e-9 || doc.phi_range[1] > 1.0 + 1e-9 {
        eprintln!("note: profile overshoots the endpoints (phi range [{}, {}])", doc.phi_range[0], doc.phi_range[1]);
    }
    emit(args.out.as_deref(), &doc.to_json()?)
}

/// Loads the profile and rebuilds the plant it was optimized for.
fn load_profile(
    profile: &Path,
    properties: Option<&Path>,
) -> Result<(ProfileDocument, crate::profile::MotionProfile, PropertyModel)> {
    let doc = ProfileDocument::read(profile)?;
    let p = doc.profile()?;
    let props_path = match properties {
        Some(p) => p.to_path_buf(),
        None => {
            let recorded = PathBuf::from(&doc.provenance.properties_path);
            let hash = io::sha256_file(&recorded)?;
            if hash != doc.provenance.properties_sha256 {
                return Err(Error::Config(format!(
                    "{} changed since the profile was optimized (sha256 mismatch)",
                    recorded.display()
                )));
            }
            recorded
        }
    };
    let samples = io::read_property_csv(&props_path)?;
    let model = build_model(&samples, p.task(), doc.plant.fit_degree, doc.plant.motor_inertia_kgm2)?;
    Ok((doc, p, model))
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let (doc, profile, model) = load_profile(&args.profile, args.properties.as_deref())?;
    let motor = io::read_motor_toml(&args.motor)?;
    let model = model.with_motor_inertia(motor.rotor_inertia)?;
    let friction = FrictionModel::new(args.mu_v.unwrap_or(doc.plant.mu_v))?;
    let nodes = doc.plant.quadrature_nodes;
    let task = *profile.task();

    let mut paths: Vec<(String, Box<dyn RescaledPath>)> = Vec::new();
    for kind in [ReferenceKind::for_mode(task.mode()), ReferenceKind::Trapezoid13] {
        let path: Box<dyn RescaledPath> = match kind {
            ReferenceKind::Trapezoid13 => Box::new(Trapezoid13::new(&task)),
            poly => Box::new(polynomial_reference(poly, &task)?),
        };
        paths.push((kind.name().to_string(), path));
    }
    paths.push((format!("cheb{}{}", task.degree(), if task.mode().is_zero() { "J0" } else { "" }), Box::new(profile)));

    let mut out = String::from("profile,tau_rms_Nm,E_kinetic_J,E_potential_J,E_loss_J,E_total_J,E_loss_rms_J\n");
    let baseline = tau_rms(paths[0].1.as_ref(), &model, &friction, nodes)?;
    for (name, path) in &paths {
        let rms = tau_rms(path.as_ref(), &model, &friction, nodes)?;
        let e = energy_decomposition(path.as_ref(), &model, &motor, &friction, nodes)?;
        // Copper loss predicted from tau_rms alone; equals E_loss without friction.
        let identity = motor.loss_factor() * task.duration() * rms * rms;
        let cells = [rms, e.kinetic, e.potential, e.loss, e.total, identity].map(io::format_number);
        out.push_str(&format!("{name},{}\n", cells.join(",")));
        eprintln!(
            "{name:<12} tau_rms {rms:.6} N m ({:+.2}%)  E_l {:.6} J  E_total {:.6} J",
            -saving_pct(baseline, rms),
            e.loss,
            e.total
        );
    }
    emit(args.out.as_deref(), &out)
}

pub fn export(args: &ExportArgs) -> Result<()> {
    let (doc, profile, model) = load_profile(&args.profile, args.properties.as_deref())?;
    let friction = FrictionModel::new(doc.plant.mu_v)?;
    let rows = io::setpoint_table(&profile, &model, &friction, args.period)?;
    eprintln!("{} setpoints at {} s", rows.len(), args.period);
    emit(args.out.as_deref(), &io::format_setpoint_csv(&rows))?;
    if let Some(p) = &args.plot_out {
        fs::write(p, io::format_plot_csv(&profile, &model, &friction, args.plot_points)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(RunConfig::parse("[task]\ntheta_b = 3.0\nspeed = 1\n").is_err());
        assert!(RunConfig::parse("[bogus]\n").is_err());
        let cfg = RunConfig::parse(
            "[task]\ntheta_b = 3.0299\ndt = 0.0735\ndegrees = [7, 9]\n[solver]\nkind = \"both\"\n[solver.ga]\nmax_generations = 10\n",
        )
        .unwrap();
        assert_eq!(cfg.task.degrees, Some(vec![7, 9]));
        assert_eq!(cfg.solver.ga.unwrap().max_generations, 10);
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "[task]\ntheta_b = 170.0\nangle_unit = \"deg\"\ndt = 0.1\ndegree = 9\n[model]\nproperties = \"p.csv\"\n")
            .unwrap();
        let args = OptimizeArgs { config: Some(path), dt: Some(0.0735), ..Default::default() };
        let (s, _) = OptimizeSettings::resolve(&args).unwrap();
        assert_eq!(s.dt, 0.0735);
        assert!((s.theta_b - 170f64.to_radians()).abs() < 1e-15);
        assert_eq!(s.degrees, vec![9]);
        assert_eq!(s.properties, dir.path().join("p.csv"));
        let bad = OptimizeArgs { degree: vec![4], theta_b: Some(1.0), dt: Some(1.0), ..Default::default() };
        assert!(matches!(OptimizeSettings::resolve(&bad), Err(Error::Config(_))));
    }
}
