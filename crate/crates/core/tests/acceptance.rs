//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chebmotion::cheb::{coefficient_bounds, project_profile, ChebyshevSeries};
use chebmotion::harness::{quadratic_oracle, simulate_measurement, synthetic_properties, SyntheticMechanism};
use chebmotion::identify::{identify_friction, DEFAULT_POSITION_FIT_DEGREE};
use chebmotion::io::{parse_setpoint_csv, read_property_csv, ProfileDocument};
use chebmotion::optimize::{
    degree_sweep, solve_bfgs, solve_ga, OptimizationContext, SolverChoice, SolverSettings,
};
use chebmotion::plant::{
    energy_decomposition, fit_property_model, motor_torque_physical, motor_torque_rescaled, tau_rms, FrictionModel,
    MotorParams, PropertyModel, DEFAULT_FIT_DEGREE,
};
use chebmotion::profile::{eliminate_constraints, kinematics, JerkMode, MotionTask};
use chebmotion::Result;

const THETA_B: f64 = 3.0299;
const DT: f64 = 0.0735;
const NODES: usize = 201;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn task(mode: JerkMode, n: usize) -> MotionTask {
    MotionTask::new(0.0, THETA_B, 0.0, DT, mode, n).expect("valid task")
}

fn slider_crank_model(task: &MotionTask) -> PropertyModel {
    let samples = synthetic_properties(&SyntheticMechanism::default_slider_crank(), (0.0, THETA_B), 200).unwrap();
    fit_property_model(&samples, task, DEFAULT_FIT_DEGREE).unwrap()
}

fn slider_crank_ctx(mode: JerkMode, n: usize) -> OptimizationContext {
    let t = task(mode, n);
    OptimizationContext::new(t, slider_crank_model(&t), FrictionModel::none(), None, NODES).unwrap()
}

fn motor() -> MotorParams {
    MotorParams::new(1.2, 0.5, 0.29, 3, 0.0, 0.004).unwrap()
}

fn random_free(rng: &mut ChaCha8Rng, dof: usize, half_width: f64) -> Vec<f64> {
    (0..dof).map(|_| rng.random_range(-half_width..=half_width)).collect()
}

/// Random free coefficients, halved until the profile stays inside the
/// endpoint range (o = 0 always does).
fn random_contained(rng: &mut ChaCha8Rng, t: &MotionTask, half_width: f64) -> Vec<f64> {
    let mut o = random_free(rng, t.dof(), half_width);
    for _ in 0..80 {
        let (lo, hi) = eliminate_constraints(&o, t).unwrap().phi_range(4001);
        if lo >= -1.0 && hi <= 1.0 {
            break;
        }
        o.iter_mut().for_each(|v| *v *= 0.5);
    }
    o
}

fn boundary_constraints() -> Result<Outcome> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bound = coefficient_bounds(1)[1];
    let mut worst = 0.0f64;
    let cases = (7..=13).map(|n| (JerkMode::Free, n)).chain((9..=13).map(|n| (JerkMode::Zero, n)));
    let mut count = 0;
    for (mode, n) in cases {
        let t = task(mode, n);
        for _ in 0..1000 {
            let p = eliminate_constraints(&random_free(&mut rng, t.dof(), bound), &t)?;
            worst = p.boundary_residuals().into_iter().fold(worst, f64::max);
            count += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(worst < 1e-9 && secs < 5.0, format!("{count} profiles, max residual {worst:.2e}, {secs:.2} s"))
}

fn coefficient_bound() -> Result<Outcome> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let limit = 4.0 / PI;
    let (mut worst0, mut worst_l) = (0.0f64, 0.0f64);
    for i in 0..500 {
        let n = rng.random_range(5..=20usize);
        let f: Box<dyn Fn(f64) -> f64> = match i % 3 {
            0 => {
                let terms: Vec<(f64, f64, f64)> = (0..6)
                    .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..8.0), rng.random_range(0.0..2.0 * PI)))
                    .collect();
                Box::new(move |x| terms.iter().map(|(a, k, ph)| a * (k * x + ph).sin()).sum())
            }
            1 => {
                let (k, shift) = (rng.random_range(1.0..200.0), rng.random_range(-0.3..0.3));
                Box::new(move |x| (k * (x - shift)).tanh())
            }
            _ => {
                let t = task(JerkMode::Free, rng.random_range(7..=13));
                let p = eliminate_constraints(&random_free(&mut rng, t.dof(), 0.05), &t)?;
                Box::new(move |x| p.phi().eval_unchecked(x))
            }
        };
        // Normalize on a dense grid plus the projection nodes so |phi| <= 1 holds
        // wherever the projection samples it.
        let m = chebmotion::cheb::projection_nodes(n);
        let grid = (0..=20000)
            .map(|j| -1.0 + j as f64 / 10000.0)
            .chain((0..m).map(|j| (2.0 * PI * j as f64 / m as f64).cos()));
        let peak = grid.map(|x| f(x.clamp(-1.0, 1.0)).abs()).fold(0.0, f64::max);
        let c = project_profile(|x| f(x) / peak, n);
        worst0 = worst0.max(c.coeffs()[0].abs());
        worst_l = c.coeffs()[1..].iter().fold(worst_l, |w, v| w.max(v.abs()));
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        worst0 <= 1.0 + 1e-10 && worst_l <= limit + 1e-10 && secs < 10.0,
        format!("500 functions, max |p0| {worst0:.6}, max |pl| {worst_l:.6} (4/pi = {limit:.6}), {secs:.2} s"),
    )
}

fn reference_exactness() -> Result<Outcome> {
    let expected = [0.0, 1.171875, 0.0, -0.1953125, 0.0, 0.0234375];
    // Basis-change oracle: the minimal quintic (15x - 10x^3 + 3x^5) / 8.
    let oracle = ChebyshevSeries::from_monomial(&[0.0, 15.0 / 8.0, 0.0, -10.0 / 8.0, 0.0, 3.0 / 8.0]);
    let p = eliminate_constraints(&[], &task(JerkMode::Free, 5))?;
    let err = p.coeffs().iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let oracle_err = oracle.coeffs().iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(err <= 1e-12 && oracle_err <= 1e-12, format!("max deviation {err:.1e} (oracle {oracle_err:.1e})"))
}

fn oracle_equivalence() -> Result<Outcome> {
    let samples = synthetic_properties(&SyntheticMechanism::constant(0.01)?, (0.0, THETA_B), 50)?;
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    let cases = [7, 9, 11, 13].map(|n| (JerkMode::Free, n)).into_iter().chain([9, 11, 13].map(|n| (JerkMode::Zero, n)));
    for (mode, n) in cases {
        let t = task(mode, n);
        let ctx = OptimizationContext::new(t, fit_property_model(&samples, &t, 6)?, FrictionModel::none(), None, NODES)?;
        let started = Instant::now();
        let b = solve_bfgs(&ctx)?;
        slowest = slowest.max(started.elapsed().as_secs_f64());
        let q = quadratic_oracle(&ctx)?;
        worst = worst.max((b.tau_rms - q.tau_rms).abs() / q.tau_rms);
    }
    outcome(worst <= 1e-6 && slowest < 2.0, format!("7 cases, max relative gap {worst:.2e}, slowest solve {slowest:.3} s"))
}

fn ga_agreement() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for (mode, n, tol) in [(JerkMode::Free, 7, 0.005), (JerkMode::Free, 9, 0.005), (JerkMode::Zero, 11, 0.04)] {
        let ctx = slider_crank_ctx(mode, n);
        let b = solve_bfgs(&ctx)?;
        let started = Instant::now();
        let g = solve_ga(&ctx, 0)?;
        let secs = started.elapsed().as_secs_f64();
        let gap = (g.tau_rms - b.tau_rms) / b.tau_rms;
        pass &= gap <= tol && secs < 300.0;
        parts.push(format!("{}{n}: {:+.4}% ({secs:.1} s)", mode.label(), 100.0 * gap));
    }
    outcome(pass, parts.join(", "))
}

fn structural_properties() -> Result<Outcome> {
    let settings = SolverSettings::default();
    let jf = degree_sweep(&slider_crank_ctx(JerkMode::Free, 7), &[7, 9, 11, 13], SolverChoice::Both, &settings)?;
    let j0 = degree_sweep(&slider_crank_ctx(JerkMode::Zero, 9), &[9, 11, 13], SolverChoice::Both, &settings)?;
    let mut failures = Vec::new();
    for table in [&jf, &j0] {
        for solver in ["bfgs", "ga"] {
            let rows: Vec<_> = table.rows.iter().filter(|r| r.solver == solver).collect();
            for w in rows.windows(2) {
                if w[1].tau_rms > w[0].tau_rms {
                    failures.push(format!("{solver} {}{} > {}", w[1].mode.label(), w[1].degree, w[0].degree));
                }
            }
            for r in rows {
                if !(r.tau_rms < table.reference_tau_rms) {
                    failures.push(format!("{solver} {}{} not below reference", r.mode.label(), r.degree));
                }
            }
        }
    }
    for r0 in j0.rows.iter().filter(|r| r.solver != "reference") {
        let rf = jf.rows.iter().find(|r| r.solver == r0.solver && r.degree == r0.degree).expect("matching row");
        if r0.tau_rms < rf.tau_rms {
            failures.push(format!("{} J0{} below JF{}", r0.solver, r0.degree, r0.degree));
        }
    }
    let summary = |t: &chebmotion::optimize::SweepTable| {
        t.rows
            .iter()
            .filter(|r| r.solver == "bfgs")
            .map(|r| format!("{}={:.4}", r.degree, r.tau_rms))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let detail = format!(
        "JF ref {:.4} bfgs {}; J0 ref {:.4} bfgs {}{}",
        jf.reference_tau_rms,
        summary(&jf),
        j0.reference_tau_rms,
        summary(&j0),
        if failures.is_empty() { String::new() } else { format!("; violations: {}", failures.join(", ")) }
    );
    outcome(failures.is_empty(), detail)
}

fn energy_identities() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let motor = motor();
    let none = FrictionModel::none();
    let (mut worst_k, mut worst_l) = (0.0f64, 0.0f64);
    let mut potentials = Vec::new();
    let model = slider_crank_model(&task(JerkMode::Free, 7));
    for i in 0..100 {
        let mode = if i % 2 == 0 { JerkMode::Free } else { JerkMode::Zero };
        let t = task(mode, rng.random_range(mode.min_degree() + 2..=13));
        let p = eliminate_constraints(&random_contained(&mut rng, &t, 0.01), &t)?;
        let e = energy_decomposition(&p, &model, &motor, &none, NODES)?;
        let rms = tau_rms(&p, &model, &none, NODES)?;
        worst_k = worst_k.max(e.kinetic.abs() / e.loss);
        let predicted = motor.loss_factor() * DT * rms * rms;
        worst_l = worst_l.max((e.loss - predicted).abs() / e.loss);
        potentials.push(e.potential);
    }
    let mean = potentials.iter().sum::<f64>() / potentials.len() as f64;
    let spread = potentials.iter().map(|p| (p - mean).abs() / mean.abs()).fold(0.0, f64::max);
    outcome(
        worst_k < 1e-6 && spread <= 1e-6 && worst_l <= 1e-8,
        format!("|E_k|/E_l {worst_k:.1e}, E_p spread {spread:.1e}, E_l identity {worst_l:.1e}"),
    )
}

fn friction_identification() -> Result<Outcome> {
    let mech = SyntheticMechanism::default_slider_crank();
    let t = task(JerkMode::Free, 5);
    let model = slider_crank_model(&t);
    let truth = 0.0157;
    let friction = FrictionModel::new(truth)?;
    let clean = simulate_measurement(&mech, &t, &friction, 0.00025, 0.0, 0)?;
    let clean_err = (identify_friction(&clean, &model, DEFAULT_POSITION_FIT_DEGREE)?.mu_v - truth).abs() / truth;
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let log = simulate_measurement(&mech, &t, &friction, 0.00025, 0.01, seed)?;
        let est = identify_friction(&log, &model, DEFAULT_POSITION_FIT_DEGREE)?;
        worst = worst.max((est.mu_v - truth).abs() / truth);
    }
    outcome(
        clean_err <= 1e-3 && worst <= 0.05,
        format!("noise-free error {:.2e}%, worst of 100 noisy seeds {:.2}%", 100.0 * clean_err, 100.0 * worst),
    )
}

fn rescaling_consistency() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let friction = FrictionModel::new(0.0157)?;
    let model = slider_crank_model(&task(JerkMode::Free, 7));
    let xs: Vec<f64> = (0..101).map(|i| -1.0 + i as f64 / 50.0).collect();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let mode = if i % 2 == 0 { JerkMode::Free } else { JerkMode::Zero };
        let t = task(mode, rng.random_range(mode.min_degree()..=13));
        let p = eliminate_constraints(&random_contained(&mut rng, &t, 0.01), &t)?;
        let k = kinematics(&p, &xs)?;
        let mut pairs = Vec::with_capacity(xs.len());
        for (j, &x) in xs.iter().enumerate() {
            let r = motor_torque_rescaled(&p, &model, &friction, x)?;
            let ph = motor_torque_physical(k.theta[j], k.theta_dot[j], k.theta_ddot[j], &model, &friction)?;
            pairs.push((r, ph));
        }
        // Relative to the local torque, floored at 1e-3 of the profile's peak so
        // that zero crossings (e.g. the dead center at the start) do not divide
        // rounding noise by nothing.
        let peak = pairs.iter().fold(0.0f64, |m, (_, ph)| m.max(ph.abs()));
        for (r, ph) in pairs {
            worst = worst.max((r - ph).abs() / ph.abs().max(1e-3 * peak));
        }
    }
    outcome(worst <= 1e-8, format!("100 profiles x 101 points, max relative difference {worst:.2e}"))
}

fn cli_round_trip() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let d = dir.path();
    let bin = env!("CARGO_BIN_EXE_chebmotion");
    let run = |args: &[&str]| -> std::io::Result<bool> {
        let out = Command::new(bin).args(args).current_dir(d).output()?;
        if !out.status.success() {
            eprintln!("{}", String::from_utf8_lossy(&out.stderr));
        }
        Ok(out.status.success())
    };
    let p = |name: &str| d.join(name).display().to_string();
    let (props, doc_path, setpoints) = (p("props.csv"), p("profile.json"), p("setpoints.csv"));
    let steps = [
        vec!["synth", "--mechanism", "slider-crank", "--theta-a", "0", "--theta-b", "173.6", "--degrees", "--out", &props],
        vec![
            "optimize", "--properties", &props, "--theta-a", "0", "--theta-b", "173.6", "--degrees", "--dt",
            "0.0735", "--degree", "11", "--solver", "bfgs", "--out", &doc_path,
        ],
        vec!["export", "--profile", &doc_path, "--period", "0.00025", "--out", &setpoints],
    ];
    for args in &steps {
        if !run(args)? {
            return outcome(false, format!("`{}` failed", args[0]));
        }
    }
    let rows = parse_setpoint_csv(&std::fs::read_to_string(d.join("setpoints.csv"))?, "setpoints.csv")?;
    let (first, last) = (rows[0], rows[rows.len() - 1]);
    let rest = [first[2], first[3], last[2], last[3]].iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let doc = ProfileDocument::read(&d.join("profile.json"))?;
    let profile = doc.profile()?;
    let samples = read_property_csv(Path::new(&doc.provenance.properties_path))?;
    let model = fit_property_model(&samples, profile.task(), doc.plant.fit_degree)?;
    let scale = profile.scale();
    let friction = FrictionModel::new(doc.plant.mu_v)?;
    let mut worst = 0.0f64;
    for row in &rows {
        let x = scale.x_of_t(row[0]).clamp(-1.0, 1.0);
        let tau = motor_torque_rescaled(&profile, &model, &friction, x)?;
        worst = worst.max((tau - row[4]).abs() / tau.abs().max(1.0));
    }

    // Identical invocations give byte-identical documents.
    let again = p("profile_again.json");
    let mut repeat = steps[1].clone();
    let last_arg = repeat.len() - 1;
    repeat[last_arg] = &again;
    let same = run(&repeat)? && std::fs::read(d.join("profile.json"))? == std::fs::read(&again)?;

    outcome(
        rest < 1e-9 && worst <= 1e-9 && rows.len() == 295 && same,
        format!(
            "{} rows, end velocity/acceleration {rest:.1e}, torque re-evaluation {worst:.1e}, reproducible {same}",
            rows.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("boundary constraints", boundary_constraints),
        ("coefficient bounds", coefficient_bound),
        ("reference exactness", reference_exactness),
        ("oracle equivalence", oracle_equivalence),
        ("GA-BFGS agreement", ga_agreement),
        ("structural sweep properties", structural_properties),
        ("energy identities", energy_identities),
        ("friction identification", friction_identification),
        ("rescaling consistency", rescaling_consistency),
        ("CLI round trip", cli_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("acceptance {:>2} {} {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
