//! RMS-torque objective, solvers and degree sweeps.

pub mod bfgs;
pub mod ga;

use std::fmt;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cheb::{clenshaw, coefficient_bounds, ChebyshevSeries};
use crate::error::{Error, Result};
use crate::plant::{self, torque_from_state, FrictionModel, MotorParams, PropertyModel};
use crate::profile::{
    polynomial_reference, ConstraintSystem, JerkMode, MotionProfile, MotionTask, PathState, ReferenceKind,
    ScaleFactors,
};
use crate::quadrature::GaussLegendre;

pub use bfgs::BfgsOptions;
pub use ga::GaOptions;

pub const DEFAULT_QUADRATURE_NODES: usize = 201;
pub const MIN_QUADRATURE_NODES: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Bfgs,
    Ga,
    QuadraticOracle,
    GridOracle,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Bfgs => "bfgs",
            SolverKind::Ga => "ga",
            SolverKind::QuadraticOracle => "quadratic_oracle",
            SolverKind::GridOracle => "grid_oracle",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything the objective needs, with the constraint map and the basis
/// values at the quadrature nodes precomputed.
#[derive(Debug, Clone)]
pub struct OptimizationContext {
    task: MotionTask,
    model: PropertyModel,
    friction: FrictionModel,
    motor: Option<MotorParams>,
    quadrature_nodes: usize,
    system: ConstraintSystem,
    rule: GaussLegendre,
    scale: ScaleFactors,
    /// `d^k phi / dx^k` at the nodes for `o = 0`, k = 0..2.
    base: [DVector<f64>; 3],
    /// Sensitivity of the same quantities to the free coefficients.
    sens: [DMatrix<f64>; 3],
}

impl OptimizationContext {
    pub fn new(
        task: MotionTask,
        model: PropertyModel,
        friction: FrictionModel,
        motor: Option<MotorParams>,
        quadrature_nodes: usize,
    ) -> Result<Self> {
        if quadrature_nodes < MIN_QUADRATURE_NODES || quadrature_nodes % 2 == 0 {
            return Err(Error::Invalid(format!(
                "quadrature nodes must be odd and >= {MIN_QUADRATURE_NODES}, got {quadrature_nodes}"
            )));
        }
        let scale = task.scale();
        if !model.scale().same_positions(&scale) {
            return Err(Error::Invalid("property model was fitted for different endpoints".into()));
        }
        let system = ConstraintSystem::new(task.mode(), task.degree())?;
        let rule = GaussLegendre::new(quadrature_nodes);
        let n = task.degree();
        let nodes = rule.len();

        // basis[k][(j, i)] = T_i^(k)(x_j)
        let basis: Vec<DMatrix<f64>> = (0..3)
            .map(|k| {
                let mut m = DMatrix::zeros(nodes, n + 1);
                for i in 0..=n {
                    let mut s = ChebyshevSeries::basis(i);
                    for _ in 0..k {
                        s = s.derivative();
                    }
                    for (j, &x) in rule.nodes().iter().enumerate() {
                        m[(j, i)] = clenshaw(s.coeffs(), x);
                    }
                }
                m
            })
            .collect();
        let p0 = DVector::from_column_slice(system.base());
        let base = [&basis[0] * &p0, &basis[1] * &p0, &basis[2] * &p0];
        let sens = [
            &basis[0] * system.sensitivity(),
            &basis[1] * system.sensitivity(),
            &basis[2] * system.sensitivity(),
        ];
        Ok(Self { task, model, friction, motor, quadrature_nodes, system, rule, scale, base, sens })
    }

    /// Same plant and settings for another degree or constraint mode.
    pub fn for_task(&self, task: MotionTask) -> Result<Self> {
        Self::new(task, self.model.clone(), self.friction, self.motor, self.quadrature_nodes)
    }

    pub fn with_quadrature_nodes(&self, nodes: usize) -> Result<Self> {
        Self::new(self.task, self.model.clone(), self.friction, self.motor, nodes)
    }

    pub fn task(&self) -> &MotionTask {
        &self.task
    }
    pub fn model(&self) -> &PropertyModel {
        &self.model
    }
    pub fn friction(&self) -> &FrictionModel {
        &self.friction
    }
    pub fn motor(&self) -> Option<&MotorParams> {
        self.motor.as_ref()
    }
    pub fn quadrature_nodes(&self) -> usize {
        self.quadrature_nodes
    }
    pub fn dof(&self) -> usize {
        self.system.dof()
    }
    pub fn constraint_system(&self) -> &ConstraintSystem {
        &self.system
    }

    /// Box for the free coefficients, from the coefficient bounds of a
    /// profile bounded by 1.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let b = coefficient_bounds(self.task.degree());
        b[self.task.mode().dependent()..].iter().map(|&v| (-v, v)).collect()
    }

    pub fn profile(&self, free: &[f64]) -> Result<MotionProfile> {
        MotionProfile::from_system(&self.system, free, &self.task)
    }

    /// Motor torque at every quadrature node. `free` must have `dof` entries.
    pub fn node_torques(&self, free: &[f64]) -> Vec<f64> {
        debug_assert_eq!(free.len(), self.dof());
        let o = DVector::from_column_slice(free);
        let phi = &self.base[0] + &self.sens[0] * &o;
        let dphi = &self.base[1] + &self.sens[1] * &o;
        let ddphi = &self.base[2] + &self.sens[2] * &o;
        (0..self.rule.len())
            .map(|j| {
                let st = PathState { phi: phi[j], dphi: dphi[j], ddphi: ddphi[j] };
                torque_from_state(st, &self.scale, &self.model, &self.friction).total()
            })
            .collect()
    }

    /// `tau_rms` without the dimension check.
    pub fn objective(&self, free: &[f64]) -> f64 {
        let sq: f64 = self.node_torques(free).iter().zip(self.rule.weights()).map(|(t, w)| w * t * t).sum();
        (0.5 * sq).sqrt()
    }

    /// `tau_rms` of the polynomial reference for this constraint mode.
    pub fn reference_tau_rms(&self) -> f64 {
        self.objective(&vec![0.0; self.dof()])
    }
}

/// RMS motor torque of the profile with free coefficients `free`.
pub fn rms_objective(free: &[f64], ctx: &OptimizationContext) -> Result<f64> {
    if free.len() != ctx.dof() {
        return Err(Error::Dimension { expected: ctx.dof(), got: free.len() });
    }
    Ok(ctx.objective(free))
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub free_coeffs: Vec<f64>,
    pub profile: MotionProfile,
    pub tau_rms: f64,
    pub iterations: usize,
    pub objective_evals: usize,
    /// Seconds; informational only.
    pub wall_time: f64,
    pub solver: SolverKind,
    pub converged: bool,
}

impl SolverResult {
    pub fn from_free(
        ctx: &OptimizationContext,
        free: Vec<f64>,
        solver: SolverKind,
        iterations: usize,
        objective_evals: usize,
        converged: bool,
        started: Instant,
    ) -> Result<Self> {
        let profile = ctx.profile(&free)?;
        let tau_rms = ctx.objective(&free);
        Ok(Self {
            free_coeffs: free,
            profile,
            tau_rms,
            iterations,
            objective_evals,
            wall_time: started.elapsed().as_secs_f64(),
            solver,
            converged,
        })
    }
}

pub fn solve_bfgs(ctx: &OptimizationContext) -> Result<SolverResult> {
    solve_bfgs_with(ctx, &BfgsOptions::default())
}

/// BFGS from the zero vector, i.e. from the polynomial reference.
pub fn solve_bfgs_with(ctx: &OptimizationContext, opts: &BfgsOptions) -> Result<SolverResult> {
    let started = Instant::now();
    let start = vec![0.0; ctx.dof()];
    let out = bfgs::minimize(&|o: &[f64]| ctx.objective(o), &start, opts);
    let converged = out.converged();
    SolverResult::from_free(ctx, out.x, SolverKind::Bfgs, out.iterations, out.evaluations, converged, started)
}

pub fn solve_ga(ctx: &OptimizationContext, seed: u64) -> Result<SolverResult> {
    solve_ga_with(ctx, seed, &GaOptions::default(), |_, _| {})
}

/// Genetic algorithm over the coefficient box; `observe` sees every population.
pub fn solve_ga_with<O: FnMut(usize, &[Vec<f64>])>(
    ctx: &OptimizationContext,
    seed: u64,
    opts: &GaOptions,
    observe: O,
) -> Result<SolverResult> {
    opts.validate()?;
    let started = Instant::now();
    let out = ga::minimize(&|o: &[f64]| ctx.objective(o), &ctx.bounds(), opts, seed, observe);
    SolverResult::from_free(ctx, out.x, SolverKind::Ga, out.generations, out.evaluations, out.stalled, started)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Bfgs,
    Ga,
    Both,
}

impl SolverChoice {
    pub fn kinds(self) -> &'static [SolverKind] {
        match self {
            SolverChoice::Bfgs => &[SolverKind::Bfgs],
            SolverChoice::Ga => &[SolverKind::Ga],
            SolverChoice::Both => &[SolverKind::Bfgs, SolverKind::Ga],
        }
    }
}

/// Solver settings shared by sweeps and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverSettings {
    pub bfgs: BfgsOptions,
    pub ga: GaOptions,
    pub seed: u64,
}

pub fn run_solver(ctx: &OptimizationContext, kind: SolverKind, settings: &SolverSettings) -> Result<SolverResult> {
    match kind {
        SolverKind::Bfgs => solve_bfgs_with(ctx, &settings.bfgs),
        SolverKind::Ga => solve_ga_with(ctx, settings.seed, &settings.ga, |_, _| {}),
        other => Err(Error::Invalid(format!("{other} is an oracle, not a solver"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub degree: usize,
    pub mode: JerkMode,
    /// `reference`, `bfgs` or `ga`.
    pub solver: String,
    pub tau_rms: f64,
    /// `100 (ref - opt) / ref`.
    pub saving_pct: f64,
    pub iterations: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub reference_tau_rms: f64,
    pub rows: Vec<SweepRow>,
    pub results: Vec<SolverResult>,
}

impl SweepTable {
    /// Result with the lowest `tau_rms`.
    pub fn best(&self) -> Option<&SolverResult> {
        self.results.iter().min_by(|a, b| a.tau_rms.total_cmp(&b.tau_rms))
    }
}

pub fn saving_pct(reference: f64, optimized: f64) -> f64 {
    100.0 * (reference - optimized) / reference
}

/// Solves the template's plant for each degree with the chosen solvers. The
/// first row is the polynomial reference of the template's constraint mode.
pub fn degree_sweep(
    template: &OptimizationContext,
    degrees: &[usize],
    choice: SolverChoice,
    settings: &SolverSettings,
) -> Result<SweepTable> {
    let mode = template.task().mode();
    let reference_kind = ReferenceKind::for_mode(mode);
    let reference = polynomial_reference(reference_kind, template.task())?;
    let reference_tau_rms =
        plant::tau_rms(&reference, template.model(), template.friction(), template.quadrature_nodes())?;
    let mut rows = vec![SweepRow {
        degree: mode.min_degree(),
        mode,
        solver: "reference".into(),
        tau_rms: reference_tau_rms,
        saving_pct: 0.0,
        iterations: 0,
        wall_time: 0.0,
    }];
    let mut results = Vec::new();
    for &degree in degrees {
        let ctx = template.for_task(template.task().with_degree(degree)?)?;
        for &kind in choice.kinds() {
            let r = run_solver(&ctx, kind, settings)?;
            rows.push(SweepRow {
                degree,
                mode,
                solver: kind.name().into(),
                tau_rms: r.tau_rms,
                saving_pct: saving_pct(reference_tau_rms, r.tau_rms),
                iterations: r.iterations,
                wall_time: r.wall_time,
            });
            results.push(r);
        }
    }
    Ok(SweepTable { reference_tau_rms, rows, results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{fit_property_model, PropertySamples};

    fn constant_ctx(mode: JerkMode, n: usize) -> OptimizationContext {
        let task = MotionTask::new(0.0, 3.0299, 0.0, 0.0735, mode, n).unwrap();
        let theta: Vec<f64> = (0..40).map(|i| 3.0299 * i as f64 / 39.0).collect();
        let samples = PropertySamples::new(theta, vec![0.01; 40], vec![0.0; 40]).unwrap();
        let model = fit_property_model(&samples, &task, 6).unwrap();
        OptimizationContext::new(task, model, FrictionModel::none(), None, 201).unwrap()
    }

    #[test]
    fn node_count_validated() {
        let ctx = constant_ctx(JerkMode::Free, 7);
        assert!(ctx.with_quadrature_nodes(31).is_err());
        assert!(ctx.with_quadrature_nodes(34).is_err());
        assert!(ctx.with_quadrature_nodes(33).is_ok());
    }

    #[test]
    fn objective_dimension_and_reference() {
        let ctx = constant_ctx(JerkMode::Free, 7);
        assert!(matches!(rms_objective(&[0.0], &ctx), Err(Error::Dimension { .. })));
        let reference = polynomial_reference(ReferenceKind::Poly5, ctx.task()).unwrap();
        let direct = plant::tau_rms(&reference, ctx.model(), ctx.friction(), 201).unwrap();
        assert!((rms_objective(&[0.0, 0.0], &ctx).unwrap() - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn objective_matches_pointwise_torque() {
        let ctx = constant_ctx(JerkMode::Zero, 11);
        let o = [0.01, -0.004, 0.002, 0.0005];
        let p = ctx.profile(&o).unwrap();
        let rule = GaussLegendre::new(201);
        let sq: f64 = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&x, &w)| w * plant::motor_torque_rescaled(&p, ctx.model(), ctx.friction(), x).unwrap().powi(2))
            .sum();
        let f = rms_objective(&o, &ctx).unwrap();
        assert!(((0.5 * sq).sqrt() - f).abs() < 1e-10 * f);
    }

    #[test]
    fn bfgs_descends_from_reference() {
        let ctx = constant_ctx(JerkMode::Free, 9);
        let r = solve_bfgs(&ctx).unwrap();
        assert!(r.tau_rms < ctx.reference_tau_rms());
        assert!(r.converged);
        assert_eq!(r.profile.free_coeffs(), &r.free_coeffs[..]);
    }

    #[test]
    fn sweep_reference_row() {
        let ctx = constant_ctx(JerkMode::Free, 7);
        let t = degree_sweep(&ctx, &[7], SolverChoice::Bfgs, &SolverSettings::default()).unwrap();
        assert_eq!(t.rows[0].solver, "reference");
        assert_eq!(t.rows[0].saving_pct, 0.0);
        assert_eq!(saving_pct(t.reference_tau_rms, t.reference_tau_rms), 0.0);
        assert!(t.rows[1].saving_pct > 0.0);
    }
}
