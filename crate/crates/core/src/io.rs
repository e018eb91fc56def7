//! File formats: property and measurement CSV, motor TOML, the profile
//! document, sweep tables, setpoint tables and plot data.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! reading a written file reproduces the values bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::identify::MeasurementLog;
use crate::optimize::SweepTable;
use crate::plant::{motor_torque_rescaled, FrictionModel, MotorParams, PropertyModel, PropertySamples};
use crate::profile::{kinematics, JerkMode, MotionProfile, MotionTask};

pub const PROPERTY_HEADER: &str = "theta_rad,inertia_kgm2,load_torque_Nm";
pub const MEASUREMENT_HEADER: &str = "time_s,position_rad,torque_Nm";
pub const SWEEP_HEADER: &str = "degree,jerk_mode,solver,tau_rms_Nm,saving_pct,iterations,wall_time_s";
pub const SETPOINT_HEADER: &str = "time_s,position_rad,velocity_radps,acceleration_radps2,ff_torque_Nm";
pub const PLOT_HEADER: &str = "x,theta_rad,velocity_radps,acceleration_radps2,torque_Nm";
pub const PROFILE_SCHEMA: &str = "chebmotion-profile/1";

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_string(), line, msg: msg.into() }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| with_path(e, path))
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Shortest round-trip decimal; exponent notation for very small or large
/// magnitudes.
pub fn format_number(v: f64) -> String {
    let mag = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&mag) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| with_path(e, path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Parses a three-column numeric table with an exact header. Returns the
/// columns and the 1-based line number of every data row.
fn parse_table(text: &str, header: &str, label: &str) -> Result<([Vec<f64>; 3], Vec<usize>)> {
    if text.contains('\r') {
        return Err(parse_err(label, 1, "line endings must be LF"));
    }
    let first = text.lines().next().unwrap_or("");
    if first != header {
        return Err(parse_err(label, 1, format!("expected header `{header}`, found `{first}`")));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut cols: [Vec<f64>; 3] = Default::default();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(label, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(parse_err(label, line, format!("expected 3 fields, found {}", record.len())));
        }
        for (col, field) in cols.iter_mut().zip(record.iter()) {
            let v: f64 = field.trim().parse().map_err(|_| parse_err(label, line, format!("not a number: `{field}`")))?;
            if !v.is_finite() {
                return Err(parse_err(label, line, format!("non-finite value `{field}`")));
            }
            col.push(v);
        }
        lines.push(line);
    }
    Ok((cols, lines))
}

pub fn parse_property_csv(text: &str, label: &str) -> Result<PropertySamples> {
    let ([theta, inertia, load], lines) = parse_table(text, PROPERTY_HEADER, label)?;
    if theta.len() < 4 {
        return Err(parse_err(label, lines.last().copied().unwrap_or(1), format!("need at least 4 samples, found {}", theta.len())));
    }
    for i in 1..theta.len() {
        if !(theta[i] > theta[i - 1]) {
            return Err(parse_err(label, lines[i], "theta must be strictly increasing"));
        }
    }
    if let Some(i) = inertia.iter().position(|&j| !(j > 0.0)) {
        return Err(parse_err(label, lines[i], "inertia must be positive"));
    }
    PropertySamples::new(theta, inertia, load)
}

pub fn read_property_csv(path: &Path) -> Result<PropertySamples> {
    parse_property_csv(&read_text(path)?, &path.display().to_string())
}

fn format_table(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn format_property_csv(samples: &PropertySamples) -> String {
    format_table(
        PROPERTY_HEADER,
        (0..samples.len()).map(|i| vec![samples.theta()[i], samples.inertia()[i], samples.load_torque()[i]]),
    )
}

pub fn write_property_csv(path: &Path, samples: &PropertySamples) -> Result<()> {
    Ok(fs::write(path, format_property_csv(samples))?)
}

pub fn parse_measurement_csv(text: &str, label: &str) -> Result<MeasurementLog> {
    let ([time, position, torque], lines) = parse_table(text, MEASUREMENT_HEADER, label)?;
    for i in 1..time.len() {
        if !(time[i] > time[i - 1]) {
            return Err(parse_err(label, lines[i], "time must be strictly increasing"));
        }
    }
    MeasurementLog::new(time, position, torque).map_err(|e| parse_err(label, 0, e.to_string()))
}

pub fn read_measurement_csv(path: &Path) -> Result<MeasurementLog> {
    parse_measurement_csv(&read_text(path)?, &path.display().to_string())
}

pub fn format_measurement_csv(log: &MeasurementLog) -> String {
    format_table(
        MEASUREMENT_HEADER,
        (0..log.len()).map(|i| vec![log.time()[i], log.position()[i], log.torque()[i]]),
    )
}

pub fn write_measurement_csv(path: &Path, log: &MeasurementLog) -> Result<()> {
    Ok(fs::write(path, format_measurement_csv(log))?)
}

pub fn parse_motor_toml(text: &str) -> Result<MotorParams> {
    let motor: MotorParams = toml::from_str(text).map_err(|e| Error::Config(format!("motor parameters: {e}")))?;
    motor.validate().map_err(|e| Error::Config(format!("motor parameters: {e}")))?;
    Ok(motor)
}

pub fn read_motor_toml(path: &Path) -> Result<MotorParams> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_motor_toml(&text)
}

/// Task fields as stored in the profile document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDoc {
    pub theta_a: f64,
    pub theta_b: f64,
    pub t_a: f64,
    pub t_b: f64,
    /// `JF` or `J0`.
    pub jerk_mode: String,
    pub degree: usize,
}

impl TaskDoc {
    pub fn from_task(task: &MotionTask) -> Self {
        Self {
            theta_a: task.theta_a(),
            theta_b: task.theta_b(),
            t_a: task.t_a(),
            t_b: task.t_b(),
            jerk_mode: task.mode().label().to_string(),
            degree: task.degree(),
        }
    }

    pub fn to_task(&self) -> Result<MotionTask> {
        let mode = match self.jerk_mode.as_str() {
            "JF" => JerkMode::Free,
            "J0" => JerkMode::Zero,
            other => return Err(Error::Config(format!("unknown jerk mode `{other}`"))),
        };
        MotionTask::new(self.theta_a, self.theta_b, self.t_a, self.t_b, mode, self.degree)
    }
}

/// One solver run as recorded in the profile document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverDoc {
    pub solver: String,
    pub tau_rms_nm: f64,
    pub saving_pct: f64,
    pub iterations: usize,
    pub objective_evals: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// Plant settings needed to re-evaluate the profile's torque.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantDoc {
    pub fit_degree: usize,
    pub inertia_fit_max_rel_residual: f64,
    pub load_fit_max_abs_residual_nm: f64,
    pub motor_inertia_kgm2: f64,
    pub mu_v: f64,
    pub quadrature_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub properties_path: String,
    pub properties_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motor_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motor_sha256: Option<String>,
    pub seed: u64,
    /// Effective settings after merging the config file and flags.
    pub settings: serde_json::Value,
}

/// Optimized profile with everything needed to reproduce and audit it.
///
/// `coefficients` is the full Chebyshev vector of `phi(x)`; `solver` is the
/// run whose coefficients were kept and `runs` lists every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub schema: String,
    pub task: TaskDoc,
    pub coefficients: Vec<f64>,
    pub free_coefficients: Vec<f64>,
    pub reference: String,
    pub reference_tau_rms_nm: f64,
    pub solver: SolverDoc,
    pub runs: Vec<SolverDoc>,
    /// Minimum and maximum of `phi` over the move; values beyond [-1, 1]
    /// mean the profile overshoots an endpoint.
    pub phi_range: [f64; 2],
    pub plant: PlantDoc,
    pub provenance: Provenance,
}

impl ProfileDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str, label: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| parse_err(label, e.line(), e.to_string()))?;
        if doc.schema != PROFILE_SCHEMA {
            return Err(parse_err(label, 1, format!("unsupported schema `{}`", doc.schema)));
        }
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?, &path.display().to_string())
    }

    /// Rebuilds the profile, checking the boundary conditions.
    pub fn profile(&self) -> Result<MotionProfile> {
        MotionProfile::from_coefficients(&self.task.to_task()?, self.coefficients.clone())
    }
}

pub fn format_sweep_csv(table: &SweepTable, record_timing: bool) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in &table.rows {
        let wall = if record_timing { format_number(r.wall_time) } else { String::new() };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.degree,
            r.mode.label(),
            r.solver,
            format_number(r.tau_rms),
            format_number(r.saving_pct),
            r.iterations,
            wall
        );
    }
    out
}

/// One row of the feedforward table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setpoint {
    pub x: f64,
    pub time: f64,
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
    pub torque: f64,
}

/// Samples the profile every `period` seconds from `t_A`; when the period
/// does not divide the duration a final row is added at `t_B`.
pub fn setpoint_table(
    profile: &MotionProfile,
    model: &PropertyModel,
    friction: &FrictionModel,
    period: f64,
) -> Result<Vec<Setpoint>> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Invalid(format!("sample period must be positive, got {period}")));
    }
    let task = profile.scale();
    let duration = 2.0 * task.a;
    let ratio = duration / period;
    if ratio > 1e8 {
        return Err(Error::Invalid("sample period too small for the move duration".into()));
    }
    let mut steps = (ratio * (1.0 + 1e-12)).floor() as usize;
    let exact = (ratio - steps as f64).abs() <= 1e-9 * ratio.max(1.0);
    if !exact && steps as f64 > ratio {
        steps -= 1;
    }
    let mut xs: Vec<f64> = (0..=steps).map(|k| (-1.0 + 2.0 * k as f64 * period / duration).min(1.0)).collect();
    if exact {
        *xs.last_mut().expect("at least one row") = 1.0;
    } else {
        xs.push(1.0);
    }
    let kin = kinematics(profile, &xs)?;
    let t_a = task.t_of_x(-1.0);
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let time = if x == 1.0 { task.t_of_x(1.0) } else { t_a + i as f64 * period };
            Ok(Setpoint {
                x,
                time,
                position: kin.theta[i],
                velocity: kin.theta_dot[i],
                acceleration: kin.theta_ddot[i],
                torque: motor_torque_rescaled(profile, model, friction, x)?,
            })
        })
        .collect()
}

pub fn format_setpoint_csv(rows: &[Setpoint]) -> String {
    format_table(
        SETPOINT_HEADER,
        rows.iter().map(|r| vec![r.time, r.position, r.velocity, r.acceleration, r.torque]),
    )
}

/// Parsed setpoint rows: time, position, velocity, acceleration, torque.
pub fn parse_setpoint_csv(text: &str, label: &str) -> Result<Vec<[f64; 5]>> {
    let mut lines = text.lines();
    if lines.next() != Some(SETPOINT_HEADER) {
        return Err(parse_err(label, 1, format!("expected header `{SETPOINT_HEADER}`")));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|_| parse_err(label, i + 2, format!("not a number: `{f}`"))))
                .collect::<Result<_>>()?;
            vals.try_into().map_err(|_| parse_err(label, i + 2, "expected 5 fields"))
        })
        .collect()
}

/// Plot data on a uniform grid of `points` rescaled times.
pub fn format_plot_csv(
    profile: &MotionProfile,
    model: &PropertyModel,
    friction: &FrictionModel,
    points: usize,
) -> Result<String> {
    let points = points.max(2);
    let xs: Vec<f64> = (0..points).map(|i| (-1.0 + 2.0 * i as f64 / (points - 1) as f64).min(1.0)).collect();
    let kin = kinematics(profile, &xs)?;
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            Ok(vec![
                x,
                kin.theta[i],
                kin.theta_dot[i],
                kin.theta_ddot[i],
                motor_torque_rescaled(profile, model, friction, x)?,
            ])
        })
        .collect::<Result<_>>()?;
    Ok(format_table(PLOT_HEADER, rows.into_iter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{synthetic_properties, SyntheticMechanism};
    use crate::plant::fit_property_model;
    use crate::profile::eliminate_constraints;

    fn samples() -> PropertySamples {
        synthetic_properties(&SyntheticMechanism::default_slider_crank(), (0.0, 3.0299), 50).unwrap()
    }

    #[test]
    fn property_round_trip() {
        let s = samples();
        let text = format_property_csv(&s);
        assert!(text.starts_with("theta_rad,inertia_kgm2,load_torque_Nm\n"));
        assert_eq!(parse_property_csv(&text, "mem").unwrap(), s);
    }

    #[test]
    fn property_rejections() {
        let bad_header = "theta_deg,inertia_kgm2,load_torque_Nm\n0,1,0\n1,1,0\n2,1,0\n3,1,0\n";
        assert!(matches!(parse_property_csv(bad_header, "f"), Err(Error::Parse { line: 1, .. })));
        let short = "theta_rad,inertia_kgm2,load_torque_Nm\n0,1,0\n1,1,0\n2,1,0\n";
        assert!(matches!(parse_property_csv(short, "f"), Err(Error::Parse { .. })));
        let nan = "theta_rad,inertia_kgm2,load_torque_Nm\n0,1,0\n1,NaN,0\n2,1,0\n3,1,0\n";
        assert!(matches!(parse_property_csv(nan, "f"), Err(Error::Parse { line: 3, .. })));
        let order = "theta_rad,inertia_kgm2,load_torque_Nm\n0,1,0\n1,1,0\n1,1,0\n3,1,0\n";
        assert!(matches!(parse_property_csv(order, "f"), Err(Error::Parse { line: 4, .. })));
        let crlf = "theta_rad,inertia_kgm2,load_torque_Nm\r\n0,1,0\r\n";
        assert!(parse_property_csv(crlf, "f").is_err());
        let ragged = "theta_rad,inertia_kgm2,load_torque_Nm\n0,1,0\n1,1\n2,1,0\n3,1,0\n";
        assert!(matches!(parse_property_csv(ragged, "f"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, -0.0, 1.0, 0.1, 1e-4, 9.99e-5, 2.6870960721931127e-15, 1e300, -3.5e15, 5e-324] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_number(2.6870960721931127e-15), "2.6870960721931127e-15");
        assert_eq!(format_number(0.25), "0.25");
    }

    #[test]
    fn motor_toml() {
        let m = parse_motor_toml("R_ohm = 1.2\nkt_NmA = 0.5\nkv_VsRad = 0.29\npole_pairs = 3\nJm_kgm2 = 1e-4\nL_H = 0.004\n").unwrap();
        assert_eq!(m.pole_pairs, 3);
        assert!(parse_motor_toml("R_ohm = 1.2\nkt_NmA = 0.5\nkv_VsRad = 0.29\npole_pairs = 3\nextra = 1\n").is_err());
        assert!(parse_motor_toml("R_ohm = -1.2\nkt_NmA = 0.5\nkv_VsRad = 0.29\npole_pairs = 3\n").is_err());
    }

    #[test]
    fn setpoint_rows() {
        let task = MotionTask::new(0.0, 3.0299, 0.0, 0.0735, JerkMode::Free, 9).unwrap();
        let model = fit_property_model(&samples(), &task, 20).unwrap();
        let p = eliminate_constraints(&[0.003, 0.002, -0.0007, 0.0025], &task).unwrap();
        let rows = setpoint_table(&p, &model, &FrictionModel::none(), 0.00025).unwrap();
        assert_eq!(rows.len(), 295);
        let (first, last) = (rows[0], rows[rows.len() - 1]);
        assert_eq!((first.time, last.time, last.x), (0.0, 0.0735, 1.0));
        for r in [first, last] {
            assert!(r.velocity.abs() < 1e-9 && r.acceleration.abs() < 1e-9);
        }
        let odd = setpoint_table(&p, &model, &FrictionModel::none(), 0.001).unwrap();
        assert_eq!(odd.len(), 73 + 1 + 1);
        assert_eq!(odd[odd.len() - 1].time, 0.0735);
        assert!(setpoint_table(&p, &model, &FrictionModel::none(), 0.0).is_err());
        let parsed = parse_setpoint_csv(&format_setpoint_csv(&rows), "mem").unwrap();
        assert_eq!(parsed[17][4], rows[17].torque);
    }
}
