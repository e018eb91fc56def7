//! Position-dependent mechanism properties, the torque equation in physical
//! and rescaled form, the motor's electrical model and the energy split.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cheb::ChebyshevSeries;
use crate::error::{Error, Result};
use crate::profile::{MotionProfile, MotionTask, PathState, RescaledPath, ScaleFactors};
use crate::quadrature::GaussLegendre;

/// Default Chebyshev degree for the inertia and load-torque fits.
pub const DEFAULT_FIT_DEGREE: usize = 20;

/// Points of the positivity check on the fitted inertia.
const POSITIVITY_GRID: usize = 1001;

/// Sampled inertia and load torque over a strictly increasing position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertySamples {
    theta: Vec<f64>,
    inertia: Vec<f64>,
    load_torque: Vec<f64>,
}

impl PropertySamples {
    pub fn new(theta: Vec<f64>, inertia: Vec<f64>, load_torque: Vec<f64>) -> Result<Self> {
        let n = theta.len();
        if inertia.len() != n || load_torque.len() != n {
            return Err(Error::Invalid(format!(
                "column lengths differ: theta {n}, inertia {}, load {}",
                inertia.len(),
                load_torque.len()
            )));
        }
        if n < 4 {
            return Err(Error::Invalid(format!("need at least 4 property samples, got {n}")));
        }
        if theta.iter().chain(&inertia).chain(&load_torque).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite property sample".into()));
        }
        if let Some(i) = theta.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(format!("position grid not strictly increasing at sample {}", i + 1)));
        }
        if let Some(i) = inertia.iter().position(|&j| j <= 0.0) {
            return Err(Error::Invalid(format!("non-positive inertia at sample {i}")));
        }
        Ok(Self { theta, inertia, load_torque })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
    pub fn inertia(&self) -> &[f64] {
        &self.inertia
    }
    pub fn load_torque(&self) -> &[f64] {
        &self.load_torque
    }
    pub fn len(&self) -> usize {
        self.theta.len()
    }
    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.theta[0], self.theta[self.theta.len() - 1])
    }
}

/// Least-squares Chebyshev fits of inertia and load torque over the rescaled
/// position `phi`.
///
/// The fit variable `u` spans the sampled `phi` interval `[lo, hi]`; when the
/// samples cover exactly `[theta_A, theta_B]` this interval is `[-1, 1]` and
/// `u = phi`. Outside the sampled interval the properties are held at their
/// boundary values.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyModel {
    inertia: ChebyshevSeries,
    load: ChebyshevSeries,
    d_inertia: ChebyshevSeries,
    scale: ScaleFactors,
    lo: f64,
    hi: f64,
    motor_inertia: f64,
    inertia_residual: f64,
    load_residual: f64,
}

/// Property values at one position, inertia including the motor shaft.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyValues {
    pub inertia: f64,
    pub d_inertia_dphi: f64,
    pub load_torque: f64,
}

pub fn fit_property_model(samples: &PropertySamples, task: &MotionTask, fit_degree: usize) -> Result<PropertyModel> {
    PropertyModel::fit(samples, task.scale(), fit_degree)
}

impl PropertyModel {
    /// Fits both properties. Only the position part of `scale` matters.
    pub fn fit(samples: &PropertySamples, scale: ScaleFactors, fit_degree: usize) -> Result<Self> {
        let (s_lo, s_hi) = samples.range();
        let (need_lo, need_hi) = (scale.theta_a().min(scale.theta_b()), scale.theta_a().max(scale.theta_b()));
        if s_lo > need_lo || s_hi < need_hi {
            return Err(Error::Range { theta: if s_lo > need_lo { need_lo } else { need_hi }, lo: s_lo, hi: s_hi });
        }
        if fit_degree >= samples.len() {
            return Err(Error::Fit(format!(
                "fit degree {fit_degree} needs more than {} samples",
                samples.len()
            )));
        }
        let phi: Vec<f64> = samples.theta().iter().map(|&t| scale.phi_of_theta(t)).collect();
        let (lo, hi) = phi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &p| (l.min(p), h.max(p)));
        let u: Vec<f64> = phi.iter().map(|&p| to_unit(p, lo, hi)).collect();

        let inertia = least_squares_chebyshev(&u, samples.inertia(), fit_degree)?;
        let load = least_squares_chebyshev(&u, samples.load_torque(), fit_degree)?;
        let d_inertia = inertia.derivative();

        let inertia_residual = u
            .iter()
            .zip(samples.inertia())
            .map(|(&x, &j)| ((inertia.eval_unchecked(x) - j) / j).abs())
            .fold(0.0, f64::max);
        let load_residual =
            u.iter().zip(samples.load_torque()).map(|(&x, &l)| (load.eval_unchecked(x) - l).abs()).fold(0.0, f64::max);

        for i in 0..POSITIVITY_GRID {
            let x = -1.0 + 2.0 * i as f64 / (POSITIVITY_GRID - 1) as f64;
            let j = inertia.eval_unchecked(x);
            if j <= 0.0 {
                return Err(Error::Fit(format!("fitted inertia {j} is not positive at u = {x}")));
            }
        }

        Ok(Self { inertia, load, d_inertia, scale, lo, hi, motor_inertia: 0.0, inertia_residual, load_residual })
    }

    /// Adds the motor shaft inertia to the fitted load inertia.
    pub fn with_motor_inertia(mut self, motor_inertia: f64) -> Result<Self> {
        if !(motor_inertia.is_finite() && motor_inertia >= 0.0) {
            return Err(Error::Invalid(format!("motor inertia must be >= 0, got {motor_inertia}")));
        }
        self.motor_inertia = motor_inertia;
        Ok(self)
    }

    /// Inertia fit in the unit fit variable.
    pub fn inertia_fit(&self) -> &ChebyshevSeries {
        &self.inertia
    }

    pub fn load_fit(&self) -> &ChebyshevSeries {
        &self.load
    }

    /// Analytic derivative of [`Self::inertia_fit`] in the fit variable.
    pub fn d_inertia_fit(&self) -> &ChebyshevSeries {
        &self.d_inertia
    }

    pub fn scale(&self) -> &ScaleFactors {
        &self.scale
    }

    pub fn motor_inertia(&self) -> f64 {
        self.motor_inertia
    }

    /// Sampled interval in `phi`.
    pub fn phi_domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Covered interval in physical position, ascending.
    pub fn theta_domain(&self) -> (f64, f64) {
        let (a, b) = (self.scale.theta_of_phi(self.lo), self.scale.theta_of_phi(self.hi));
        (a.min(b), a.max(b))
    }

    /// Largest relative inertia residual on the samples.
    pub fn inertia_residual(&self) -> f64 {
        self.inertia_residual
    }

    /// Largest absolute load-torque residual on the samples, N m.
    pub fn load_residual(&self) -> f64 {
        self.load_residual
    }

    /// Properties at rescaled position `phi`, clamped to the sampled interval.
    pub fn at_phi(&self, phi: f64) -> PropertyValues {
        let inside = phi >= self.lo && phi <= self.hi;
        let u = to_unit(phi.clamp(self.lo, self.hi), self.lo, self.hi);
        let chain = 2.0 / (self.hi - self.lo);
        PropertyValues {
            inertia: self.inertia.eval_unchecked(u) + self.motor_inertia,
            d_inertia_dphi: if inside { self.d_inertia.eval_unchecked(u) * chain } else { 0.0 },
            load_torque: self.load.eval_unchecked(u),
        }
    }

    /// Properties at physical position, with `dJ/dtheta` in place of `dJ/dphi`.
    pub fn at_theta(&self, theta: f64) -> Result<PropertyValues> {
        let phi = self.scale.phi_of_theta(theta);
        let slack = 1e-12 * (self.hi - self.lo);
        if phi < self.lo - slack || phi > self.hi + slack {
            let (lo, hi) = self.theta_domain();
            return Err(Error::Range { theta, lo, hi });
        }
        let v = self.at_phi(phi.clamp(self.lo, self.hi));
        Ok(PropertyValues { d_inertia_dphi: v.d_inertia_dphi / self.scale.e, ..v })
    }

    fn check_profile(&self, scale: &ScaleFactors) -> Result<()> {
        if !self.scale.same_positions(scale) {
            return Err(Error::Invalid(format!(
                "property model was fitted for [{}, {}] but the profile moves over [{}, {}]",
                self.scale.theta_a(),
                self.scale.theta_b(),
                scale.theta_a(),
                scale.theta_b()
            )));
        }
        Ok(())
    }
}

fn to_unit(phi: f64, lo: f64, hi: f64) -> f64 {
    (2.0 * phi - (lo + hi)) / (hi - lo)
}

/// Least-squares Chebyshev fit of `y` at abscissae `x` in `[-1, 1]`.
pub fn least_squares_chebyshev(x: &[f64], y: &[f64], degree: usize) -> Result<ChebyshevSeries> {
    if x.len() != y.len() {
        return Err(Error::Dimension { expected: x.len(), got: y.len() });
    }
    if degree >= x.len() {
        return Err(Error::Fit(format!("degree {degree} needs more than {} points", x.len())));
    }
    let mut a = DMatrix::zeros(x.len(), degree + 1);
    for (r, &xv) in x.iter().enumerate() {
        let (mut t0, mut t1) = (1.0, xv);
        a[(r, 0)] = 1.0;
        if degree >= 1 {
            a[(r, 1)] = xv;
        }
        for k in 2..=degree {
            let t2 = 2.0 * xv * t1 - t0;
            a[(r, k)] = t2;
            t0 = t1;
            t1 = t2;
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::Fit(format!("rank-deficient fit (condition {:e})", smax / smin)));
    }
    let b = DVector::from_column_slice(y);
    let sol = svd.solve(&b, 0.0).map_err(|e| Error::Fit(e.to_string()))?;
    ChebyshevSeries::new(sol.as_slice().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorParams {
    #[serde(rename = "R_ohm")]
    pub resistance: f64,
    #[serde(rename = "kt_NmA")]
    pub torque_constant: f64,
    #[serde(rename = "kv_VsRad")]
    pub back_emf_constant: f64,
    pub pole_pairs: u32,
    #[serde(rename = "Jm_kgm2", default)]
    pub rotor_inertia: f64,
    /// Stored for completeness; the inductive term carries no net energy.
    #[serde(rename = "L_H", default)]
    pub inductance: f64,
}

impl MotorParams {
    pub fn new(
        resistance: f64,
        torque_constant: f64,
        back_emf_constant: f64,
        pole_pairs: u32,
        rotor_inertia: f64,
        inductance: f64,
    ) -> Result<Self> {
        let m = Self { resistance, torque_constant, back_emf_constant, pole_pairs, rotor_inertia, inductance };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.resistance, self.torque_constant, self.back_emf_constant, self.rotor_inertia, self.inductance]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Invalid("non-finite motor parameter".into()));
        }
        if self.resistance <= 0.0 || self.torque_constant <= 0.0 || self.pole_pairs < 1 {
            return Err(Error::Invalid("motor needs R > 0, k_t > 0 and at least one pole pair".into()));
        }
        if self.rotor_inertia < 0.0 || self.inductance < 0.0 {
            return Err(Error::Invalid("motor inertia and inductance must be >= 0".into()));
        }
        Ok(())
    }

    /// `p k_v / k_t`, the back-emf power factor.
    pub fn emf_factor(&self) -> f64 {
        self.pole_pairs as f64 * self.back_emf_constant / self.torque_constant
    }

    /// `R / k_t^2`, the copper-loss factor.
    pub fn loss_factor(&self) -> f64 {
        self.resistance / (self.torque_constant * self.torque_constant)
    }
}

/// Viscous friction `tau_f = mu_v * theta_dot`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrictionModel {
    mu_v: f64,
}

impl FrictionModel {
    pub fn new(mu_v: f64) -> Result<Self> {
        if !(mu_v.is_finite() && mu_v >= 0.0) {
            return Err(Error::Invalid(format!("viscous friction must be >= 0, got {mu_v}")));
        }
        Ok(Self { mu_v })
    }

    pub fn none() -> Self {
        Self { mu_v: 0.0 }
    }

    pub fn mu_v(&self) -> f64 {
        self.mu_v
    }

    pub fn torque(&self, theta_dot: f64) -> f64 {
        self.mu_v * theta_dot
    }
}

/// Torque contributions at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueBreakdown {
    pub load: f64,
    pub acceleration: f64,
    pub variation: f64,
    pub friction: f64,
    pub theta_dot: f64,
}

impl TorqueBreakdown {
    pub fn total(&self) -> f64 {
        self.load + self.acceleration + self.variation + self.friction
    }
}

/// Rescaled torque equation for a path state; `scale` supplies the time and
/// position factors.
pub fn torque_from_state(
    state: PathState,
    scale: &ScaleFactors,
    model: &PropertyModel,
    friction: &FrictionModel,
) -> TorqueBreakdown {
    let props = model.at_phi(state.phi);
    let speed = state.dphi / (scale.a * scale.c);
    TorqueBreakdown {
        load: props.load_torque,
        variation: 0.5 * props.d_inertia_dphi / scale.e * speed * speed,
        acceleration: props.inertia * state.ddphi / (scale.a * scale.a * scale.c),
        friction: friction.torque(speed),
        theta_dot: speed,
    }
}

/// Motor torque of `profile` at rescaled time `x`.
pub fn motor_torque_rescaled(
    profile: &MotionProfile,
    model: &PropertyModel,
    friction: &FrictionModel,
    x: f64,
) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain { value: x });
    }
    let scale = profile.scale();
    model.check_profile(&scale)?;
    Ok(torque_from_state(profile.state(x), &scale, model, friction).total())
}

/// Torque equation in physical units.
pub fn motor_torque_physical(
    theta: f64,
    theta_dot: f64,
    theta_ddot: f64,
    model: &PropertyModel,
    friction: &FrictionModel,
) -> Result<f64> {
    let p = model.at_theta(theta)?;
    Ok(p.load_torque + p.inertia * theta_ddot + 0.5 * p.d_inertia_dphi * theta_dot * theta_dot + friction.torque(theta_dot))
}

/// Instantaneous electrical input power; negative while regenerating.
pub fn electrical_power(motor: &MotorParams, tau_m: f64, theta_dot: f64) -> f64 {
    motor.loss_factor() * tau_m * tau_m + motor.emf_factor() * tau_m * theta_dot
}

/// Energy split of one move, J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// Kinetic term, zero for rest-to-rest motion.
    pub kinetic: f64,
    /// Potential term, fixed by the endpoints.
    pub potential: f64,
    /// Copper and friction losses.
    pub loss: f64,
    pub total: f64,
}

/// Splits `[-1, 1]` at the path's breakpoints and integrates `f` with the
/// given rule on each piece.
pub fn integrate_path<P, F>(path: &P, rule: &GaussLegendre, mut f: F) -> f64
where
    P: RescaledPath + ?Sized,
    F: FnMut(f64) -> f64,
{
    let mut edges = vec![-1.0];
    edges.extend(path.breakpoints().into_iter().filter(|b| *b > -1.0 && *b < 1.0));
    edges.push(1.0);
    edges.windows(2).map(|w| rule.integrate_on(w[0], w[1], &mut f)).sum()
}

/// Energy decomposition by Gauss–Legendre quadrature in `x` with `dt = a dx`.
pub fn energy_decomposition<P: RescaledPath + ?Sized>(
    path: &P,
    model: &PropertyModel,
    motor: &MotorParams,
    friction: &FrictionModel,
    nodes: usize,
) -> Result<EnergyBreakdown> {
    let scale = path.task().scale();
    model.check_profile(&scale)?;
    let rule = GaussLegendre::new(nodes);
    let emf = motor.emf_factor();
    let loss = motor.loss_factor();
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    let mut lost = 0.0;
    let mut edges = vec![-1.0];
    edges.extend(path.breakpoints().into_iter().filter(|b| *b > -1.0 && *b < 1.0));
    edges.push(1.0);
    for w in edges.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[1] + w[0]);
        for (&u, &wt) in rule.nodes().iter().zip(rule.weights()) {
            let x = mid + half * u;
            let tq = torque_from_state(path.state(x), &scale, model, friction);
            let weight = wt * half * scale.a;
            kinetic += weight * emf * (tq.acceleration + tq.variation) * tq.theta_dot;
            potential += weight * emf * tq.load * tq.theta_dot;
            lost += weight * (loss * tq.total() * tq.total() + emf * tq.friction * tq.theta_dot);
        }
    }
    Ok(EnergyBreakdown { kinetic, potential, loss: lost, total: kinetic + potential + lost })
}

/// RMS motor torque of any rescaled path, `sqrt(1/2 int tau^2 dx)`.
pub fn tau_rms<P: RescaledPath + ?Sized>(
    path: &P,
    model: &PropertyModel,
    friction: &FrictionModel,
    nodes: usize,
) -> Result<f64> {
    let scale = path.task().scale();
    model.check_profile(&scale)?;
    let rule = GaussLegendre::new(nodes);
    let sq = integrate_path(path, &rule, |x| {
        let t = torque_from_state(path.state(x), &scale, model, friction).total();
        t * t
    });
    Ok((0.5 * sq).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{eliminate_constraints, polynomial_reference, JerkMode, ReferenceKind, Trapezoid13};

    fn task() -> MotionTask {
        MotionTask::new(0.0, 3.0299, 0.0, 0.0735, JerkMode::Free, 9).unwrap()
    }

    fn constant_samples(j: f64) -> PropertySamples {
        let theta: Vec<f64> = (0..50).map(|i| 3.0299 * i as f64 / 49.0).collect();
        PropertySamples::new(theta.clone(), vec![j; 50], vec![0.0; 50]).unwrap()
    }

    #[test]
    fn sample_validation() {
        assert!(PropertySamples::new(vec![0.0, 1.0, 2.0], vec![1.0; 3], vec![0.0; 3]).is_err());
        assert!(PropertySamples::new(vec![0.0, 1.0, 1.0, 2.0], vec![1.0; 4], vec![0.0; 4]).is_err());
        assert!(PropertySamples::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.0, 1.0, 1.0], vec![0.0; 4]).is_err());
        assert!(PropertySamples::new(vec![0.0, 1.0, 2.0, f64::NAN], vec![1.0; 4], vec![0.0; 4]).is_err());
    }

    #[test]
    fn constant_inertia_fit() {
        let m = fit_property_model(&constant_samples(0.5), &task(), 20).unwrap();
        assert_eq!(m.phi_domain(), (-1.0, 1.0));
        for i in 0..101 {
            let phi = -1.0 + 0.02 * i as f64;
            let v = m.at_phi(phi);
            assert!((v.inertia - 0.5).abs() < 1e-12);
            assert!(v.d_inertia_dphi.abs() < 1e-10 * 0.5);
        }
    }

    #[test]
    fn coverage_and_degree_errors() {
        let short = PropertySamples::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 4], vec![0.0; 4]).unwrap();
        assert!(matches!(fit_property_model(&short, &task(), 2), Err(Error::Range { .. })));
        let ok = PropertySamples::new(vec![0.0, 1.0, 2.0, 3.1], vec![1.0; 4], vec![0.0; 4]).unwrap();
        assert!(matches!(fit_property_model(&ok, &task(), 4), Err(Error::Fit(_))));
    }

    #[test]
    fn torque_examples() {
        let m = fit_property_model(&constant_samples(0.5), &task(), 10).unwrap();
        let f = FrictionModel::none();
        let t = motor_torque_physical(1.0, 0.0, 2.0, &m, &f).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        assert!(motor_torque_physical(-0.5, 0.0, 0.0, &m, &f).is_err());

        let p = eliminate_constraints(&[0.01, -0.02, 0.003, 0.0], &task()).unwrap();
        let s = p.scale();
        for x in [-0.7, 0.0, 0.4] {
            let st = p.state(x);
            let expect = 0.5 * st.ddphi * s.acceleration_factor();
            assert!((motor_torque_rescaled(&p, &m, &f, x).unwrap() - expect).abs() < 1e-9 * expect.abs().max(1.0));
        }
        assert!(motor_torque_rescaled(&p, &m, &f, 1.1).is_err());
    }

    #[test]
    fn power_examples() {
        let m = MotorParams::new(1.0, 1.0, 0.0, 1, 0.0, 0.0).unwrap();
        assert_eq!(electrical_power(&m, 3.0, 10.0), 9.0);
        assert_eq!(electrical_power(&m, 0.0, 10.0), 0.0);
        let m = MotorParams::new(1.0, 1.0, 1.0, 1, 0.0, 0.0).unwrap();
        assert_eq!(electrical_power(&m, 2.0, -3.0), -2.0);
        assert!(MotorParams::new(0.0, 1.0, 1.0, 1, 0.0, 0.0).is_err());
        assert!(MotorParams::new(1.0, 1.0, 1.0, 0, 0.0, 0.0).is_err());
    }

    #[test]
    fn motor_inertia_adds() {
        let m = fit_property_model(&constant_samples(0.5), &task(), 5).unwrap().with_motor_inertia(0.25).unwrap();
        assert!((m.at_phi(0.3).inertia - 0.75).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_rms_closed_form() {
        let t = task();
        let m = fit_property_model(&constant_samples(0.01), &t, 4).unwrap();
        let tr = Trapezoid13::new(&t);
        let got = tau_rms(&tr, &m, &FrictionModel::none(), 33).unwrap();
        let expect = 0.01 * 9.0 * t.displacement() / (2.0 * t.duration().powi(2)) * (2.0f64 / 3.0).sqrt();
        assert!((got - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn copper_loss_identity() {
        let t = task();
        let m = fit_property_model(&constant_samples(0.01), &t, 4).unwrap();
        let motor = MotorParams::new(1.3, 0.8, 0.5, 3, 0.0, 0.0).unwrap();
        let p = polynomial_reference(ReferenceKind::Poly5, &t).unwrap();
        let f = FrictionModel::none();
        let e = energy_decomposition(&p, &m, &motor, &f, 201).unwrap();
        let rms = tau_rms(&p, &m, &f, 201).unwrap();
        let expect = motor.resistance * t.duration() / motor.torque_constant.powi(2) * rms * rms;
        assert!((e.loss - expect).abs() < 1e-8 * expect);
        assert!(e.kinetic.abs() < 1e-6 * e.loss);
        assert!((e.total - (e.kinetic + e.potential + e.loss)).abs() < 1e-12 * e.total.abs().max(1.0));
    }

    #[test]
    fn mismatched_model_rejected() {
        let m = fit_property_model(&constant_samples(0.01), &task(), 4).unwrap();
        let other = MotionTask::new(0.0, 2.0, 0.0, 1.0, JerkMode::Free, 5).unwrap();
        let p = polynomial_reference(ReferenceKind::Poly5, &other).unwrap();
        assert!(motor_torque_rescaled(&p, &m, &FrictionModel::none(), 0.0).is_err());
    }
}
