//! Synthetic mechanisms with closed-form properties, and brute-force and
//! closed-form oracles for the optimization problem.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cheb::coefficient_bounds;
use crate::error::{Error, Result};
use crate::identify::MeasurementLog;
use crate::optimize::{OptimizationContext, SolverKind, SolverResult};
use crate::plant::{motor_torque_rescaled, FrictionModel, PropertySamples};
use crate::profile::{eliminate_constraints, polynomial_reference, MotionTask, ReferenceKind, RescaledPath};
use crate::quadrature::GaussLegendre;

/// Mechanisms whose reduced inertia and load torque are known exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticMechanism {
    /// Position-independent inertia, no load.
    Constant { inertia: f64 },
    /// Crank of radius `crank_radius` driving a slider through a rod of
    /// length `rod_length`; `load_force` acts on the slider.
    SliderCrank { crank_inertia: f64, slider_mass: f64, crank_radius: f64, rod_length: f64, load_force: f64 },
}

impl SyntheticMechanism {
    pub fn constant(inertia: f64) -> Result<Self> {
        let m = SyntheticMechanism::Constant { inertia };
        m.validate()?;
        Ok(m)
    }

    /// Slider-crank with r = 0.05 m, l = 0.2 m, m = 1 kg, J_crank = 0.002 kg m^2
    /// and a 20 N process force.
    pub fn default_slider_crank() -> Self {
        SyntheticMechanism::SliderCrank {
            crank_inertia: 0.002,
            slider_mass: 1.0,
            crank_radius: 0.05,
            rod_length: 0.2,
            load_force: 20.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SyntheticMechanism::Constant { inertia } => {
                if !(inertia > 0.0 && inertia.is_finite()) {
                    return Err(Error::Invalid(format!("inertia must be positive, got {inertia}")));
                }
            }
            SyntheticMechanism::SliderCrank { crank_inertia, slider_mass, crank_radius, rod_length, load_force } => {
                if !(rod_length > crank_radius && crank_radius > 0.0) {
                    return Err(Error::Invalid("slider-crank needs rod length > crank radius > 0".into()));
                }
                if !(crank_inertia > 0.0 && slider_mass > 0.0) || !load_force.is_finite() {
                    return Err(Error::Invalid("slider-crank masses and inertia must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Slider position and its first two derivatives with respect to the
    /// crank angle. Zero for the constant mechanism.
    fn slider(&self, theta: f64) -> (f64, f64, f64) {
        match *self {
            SyntheticMechanism::Constant { .. } => (0.0, 0.0, 0.0),
            SyntheticMechanism::SliderCrank { crank_radius: r, rod_length: l, .. } => {
                let (s, c) = theta.sin_cos();
                let w = (l * l - r * r * s * s).sqrt();
                let x = r * c + w;
                let dx = -r * s - r * r * s * c / w;
                let ddx = -r * c - r * r * (c * c - s * s) / w - r.powi(4) * s * s * c * c / w.powi(3);
                (x, dx, ddx)
            }
        }
    }

    pub fn slider_position(&self, theta: f64) -> f64 {
        self.slider(theta).0
    }

    /// Reduced inertia `J(theta)`.
    pub fn inertia(&self, theta: f64) -> f64 {
        match *self {
            SyntheticMechanism::Constant { inertia } => inertia,
            SyntheticMechanism::SliderCrank { crank_inertia, slider_mass, .. } => {
                let dx = self.slider(theta).1;
                crank_inertia + slider_mass * dx * dx
            }
        }
    }

    /// `dJ/dtheta = 2 m x' x''`.
    pub fn d_inertia(&self, theta: f64) -> f64 {
        match *self {
            SyntheticMechanism::Constant { .. } => 0.0,
            SyntheticMechanism::SliderCrank { slider_mass, .. } => {
                let (_, dx, ddx) = self.slider(theta);
                2.0 * slider_mass * dx * ddx
            }
        }
    }

    /// Load torque `-F x'(theta)`.
    pub fn load_torque(&self, theta: f64) -> f64 {
        match *self {
            SyntheticMechanism::Constant { .. } => 0.0,
            SyntheticMechanism::SliderCrank { load_force, .. } => -load_force * self.slider(theta).1,
        }
    }

    /// Exact motor torque for a physical state.
    pub fn torque(&self, theta: f64, theta_dot: f64, theta_ddot: f64, friction: &FrictionModel) -> f64 {
        self.load_torque(theta)
            + self.inertia(theta) * theta_ddot
            + 0.5 * self.d_inertia(theta) * theta_dot * theta_dot
            + friction.torque(theta_dot)
    }
}

/// Samples the mechanism on a uniform grid of `n_s` points over `theta_range`.
pub fn synthetic_properties(mech: &SyntheticMechanism, theta_range: (f64, f64), n_s: usize) -> Result<PropertySamples> {
    mech.validate()?;
    if n_s < 4 {
        return Err(Error::Invalid(format!("need at least 4 samples, got {n_s}")));
    }
    let (lo, hi) = theta_range;
    if !(hi > lo) {
        return Err(Error::Invalid("empty position range".into()));
    }
    let theta: Vec<f64> = (0..n_s)
        .map(|i| if i + 1 == n_s { hi } else { lo + (hi - lo) * i as f64 / (n_s - 1) as f64 })
        .collect();
    let inertia = theta.iter().map(|&t| mech.inertia(t)).collect();
    let load = theta.iter().map(|&t| mech.load_torque(t)).collect();
    PropertySamples::new(theta, inertia, load)
}

/// Forward-simulates a measurement: the minimal quintic over `task` sampled
/// every `period`, with exact mechanism torque plus friction, optionally
/// multiplied by `1 + noise * N(0, 1)`.
pub fn simulate_measurement(
    mech: &SyntheticMechanism,
    task: &MotionTask,
    friction: &FrictionModel,
    period: f64,
    relative_noise: f64,
    seed: u64,
) -> Result<MeasurementLog> {
    if !(period > 0.0) {
        return Err(Error::Invalid("sample period must be positive".into()));
    }
    let excitation = polynomial_reference(ReferenceKind::Poly5, task)?;
    let scale = task.scale();
    let steps = (task.duration() / period + 1e-9).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let (mut time, mut position, mut torque) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..=steps {
        let t = task.t_a() + k as f64 * period;
        let x = scale.x_of_t(t).clamp(-1.0, 1.0);
        let st = excitation.state(x);
        let theta = scale.theta_of_phi(st.phi);
        let tau = mech.torque(
            theta,
            st.dphi * scale.velocity_factor(),
            st.ddphi * scale.acceleration_factor(),
            friction,
        );
        let noisy = if relative_noise > 0.0 { tau * (1.0 + relative_noise * normal.sample(&mut rng)) } else { tau };
        time.push(t);
        position.push(theta);
        torque.push(noisy);
    }
    MeasurementLog::new(time, position, torque)
}

/// Exact optimum for a constant-inertia, load-free, friction-free plant,
/// where the torque is affine in the free coefficients and `tau_rms^2` is a
/// convex quadratic.
pub fn quadratic_oracle(ctx: &OptimizationContext) -> Result<SolverResult> {
    let started = Instant::now();
    let model = ctx.model();
    let j0 = model.inertia_fit().coeffs()[0];
    let tol = 1e-12 * j0.abs();
    if model.inertia_fit().coeffs()[1..].iter().any(|c| c.abs() > tol) {
        return Err(Error::Refused("inertia is not constant".into()));
    }
    if model.load_fit().coeffs().iter().any(|c| c.abs() > tol) {
        return Err(Error::Refused("load torque is not zero".into()));
    }
    if ctx.friction().mu_v() != 0.0 {
        return Err(Error::Refused("friction is not zero".into()));
    }

    let task = ctx.task();
    let dof = ctx.dof();
    let rule = GaussLegendre::new(ctx.quadrature_nodes());
    let torques = |free: &[f64]| -> Result<Vec<f64>> {
        let p = eliminate_constraints(free, task)?;
        rule.nodes().iter().map(|&x| motor_torque_rescaled(&p, model, ctx.friction(), x)).collect()
    };
    let zero = vec![0.0; dof];
    let g0 = DVector::from_vec(torques(&zero)?);
    let mut g = DMatrix::zeros(rule.len(), dof);
    for k in 0..dof {
        let mut e = zero.clone();
        e[k] = 1.0;
        let col = DVector::from_vec(torques(&e)?) - &g0;
        g.set_column(k, &col);
    }
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(rule.weights()));
    let normal = g.transpose() * &w * &g;
    let rhs = -(g.transpose() * &w * &g0);
    let free = if dof == 0 {
        Vec::new()
    } else {
        let chol = normal.cholesky().ok_or_else(|| Error::Internal("normal matrix not positive definite".into()))?;
        chol.solve(&rhs).as_slice().to_vec()
    };
    let tq = DVector::from_vec(torques(&free)?);
    let tau_rms = (0.5 * tq.iter().zip(rule.weights()).map(|(t, w)| w * t * t).sum::<f64>()).sqrt();
    let profile = eliminate_constraints(&free, task)?;
    Ok(SolverResult {
        free_coeffs: free,
        profile,
        tau_rms,
        iterations: 1,
        objective_evals: dof + 2,
        wall_time: started.elapsed().as_secs_f64(),
        solver: SolverKind::QuadraticOracle,
        converged: true,
    })
}

/// Exhaustive search over the coefficient box with `points` values per axis
/// (a single point means the center, `o = 0`).
pub fn grid_oracle(ctx: &OptimizationContext, points: usize) -> Result<SolverResult> {
    let started = Instant::now();
    let dof = ctx.dof();
    if dof > 2 {
        return Err(Error::Refused(format!("grid search limited to 2 free coefficients, got {dof}")));
    }
    if points == 0 {
        return Err(Error::Invalid("grid needs at least one point per axis".into()));
    }
    let bound = coefficient_bounds(1)[1];
    let axis: Vec<f64> = if points == 1 {
        vec![0.0]
    } else {
        (0..points).map(|i| -bound + 2.0 * bound * i as f64 / (points - 1) as f64).collect()
    };
    let candidates: Vec<Vec<f64>> = match dof {
        0 => vec![vec![]],
        1 => axis.iter().map(|&v| vec![v]).collect(),
        _ => axis.iter().flat_map(|&u| axis.iter().map(move |&v| vec![u, v])).collect(),
    };
    let values: Vec<f64> = candidates.par_iter().map(|o| ctx.objective(o)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one candidate");
    let free = candidates[best].clone();
    Ok(SolverResult {
        profile: ctx.profile(&free)?,
        free_coeffs: free,
        tau_rms: values[best],
        iterations: 1,
        objective_evals: candidates.len(),
        wall_time: started.elapsed().as_secs_f64(),
        solver: SolverKind::GridOracle,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::fit_property_model;
    use crate::profile::JerkMode;

    #[test]
    fn constant_samples() {
        let s = synthetic_properties(&SyntheticMechanism::constant(0.3).unwrap(), (0.0, 2.0), 10).unwrap();
        assert!(s.inertia().iter().all(|&j| j == 0.3));
        assert!(s.load_torque().iter().all(|&t| t == 0.0));
        assert_eq!(s.range(), (0.0, 2.0));
    }

    #[test]
    fn dead_centers() {
        let m = SyntheticMechanism::default_slider_crank();
        assert!((m.inertia(0.0) - 0.002).abs() < 1e-15);
        assert!((m.inertia(std::f64::consts::PI) - 0.002).abs() < 1e-15);
    }

    #[test]
    fn invalid_geometry() {
        let m = SyntheticMechanism::SliderCrank {
            crank_inertia: 0.002,
            slider_mass: 1.0,
            crank_radius: 0.3,
            rod_length: 0.2,
            load_force: 0.0,
        };
        assert!(synthetic_properties(&m, (0.0, 1.0), 10).is_err());
        assert!(SyntheticMechanism::constant(-1.0).is_err());
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let m = SyntheticMechanism::default_slider_crank();
        let h = 1e-4;
        for i in 0..100 {
            let theta = -3.0 + 0.06 * i as f64 + 0.013;
            let fd = |f: &dyn Fn(f64) -> f64| (-f(theta + 2.0 * h) + 8.0 * f(theta + h) - 8.0 * f(theta - h) + f(theta - 2.0 * h)) / (12.0 * h);
            let dj = m.d_inertia(theta);
            let dj_fd = fd(&|t| m.inertia(t));
            assert!((dj - dj_fd).abs() <= 1e-7 * dj.abs().max(1e-3 * 0.002), "theta={theta}: {dj} vs {dj_fd}");
            let dx_fd = fd(&|t| m.slider_position(t));
            assert!((m.slider(theta).1 - dx_fd).abs() < 1e-10);
        }
    }

    fn constant_ctx(n: usize) -> OptimizationContext {
        let task = MotionTask::new(0.0, 3.0299, 0.0, 0.0735, JerkMode::Free, n).unwrap();
        let s = synthetic_properties(&SyntheticMechanism::constant(0.01).unwrap(), (0.0, 3.0299), 40).unwrap();
        let model = fit_property_model(&s, &task, 6).unwrap();
        OptimizationContext::new(task, model, FrictionModel::none(), None, 201).unwrap()
    }

    #[test]
    fn quadratic_oracle_dof_zero_is_reference() {
        let ctx = constant_ctx(5);
        let r = quadratic_oracle(&ctx).unwrap();
        assert!((r.tau_rms - ctx.reference_tau_rms()).abs() < 1e-12 * r.tau_rms);
    }

    #[test]
    fn oracles_agree_on_two_dof() {
        let ctx = constant_ctx(7);
        let q = quadratic_oracle(&ctx).unwrap();
        assert!(q.tau_rms <= ctx.reference_tau_rms());
        let g = grid_oracle(&ctx, 401).unwrap();
        let cell = 2.0 * coefficient_bounds(1)[1] / 400.0;
        for (a, b) in q.free_coeffs.iter().zip(&g.free_coeffs) {
            assert!((a - b).abs() <= cell, "{a} vs {b}");
        }
        assert!(g.tau_rms >= q.tau_rms * (1.0 - 1e-12));
        let center = grid_oracle(&ctx, 1).unwrap();
        assert_eq!(center.free_coeffs, vec![0.0, 0.0]);
        assert_eq!(center.tau_rms, ctx.reference_tau_rms());
    }

    #[test]
    fn oracle_refusals() {
        let ctx = constant_ctx(11);
        assert!(matches!(grid_oracle(&ctx, 3), Err(Error::Refused(_))));
        let task = MotionTask::new(0.0, 3.0299, 0.0, 0.0735, JerkMode::Free, 7).unwrap();
        let s = synthetic_properties(&SyntheticMechanism::default_slider_crank(), (0.0, 3.0299), 100).unwrap();
        let model = fit_property_model(&s, &task, 20).unwrap();
        let ctx = OptimizationContext::new(task, model, FrictionModel::none(), None, 201).unwrap();
        assert!(matches!(quadratic_oracle(&ctx), Err(Error::Refused(_))));
    }
}
