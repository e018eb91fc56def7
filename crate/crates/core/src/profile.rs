//! Motion tasks, time/position rescaling, boundary-constraint elimination and
//! reference profiles.
//!
//! A profile lives on the rescaled square: time `t in [t_A, t_B]` maps to
//! `x in [-1, 1]` through `t = a x + b`, position maps to `phi in [-1, 1]`
//! through `phi = c theta + d`. The lowest 6 (jerk-free) or 8 (jerk-zero)
//! Chebyshev coefficients are fixed by the rest-to-rest conditions; the rest
//! are the free design vector.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cheb::{endpoint_derivative, ChebyshevSeries, End};
use crate::error::{Error, Result};

/// Boundary residual tolerance shared by validation and tests.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Default number of samples for sampled (non-polynomial) profiles.
pub const DEFAULT_SAMPLED_POINTS: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JerkMode {
    /// Position, velocity and acceleration fixed at both ends.
    #[serde(rename = "JF")]
    Free,
    /// Additionally zero jerk at both ends.
    #[serde(rename = "J0")]
    Zero,
}

impl JerkMode {
    pub fn from_flag(jerk_zero: bool) -> Self {
        if jerk_zero {
            JerkMode::Zero
        } else {
            JerkMode::Free
        }
    }

    pub fn is_zero(self) -> bool {
        self == JerkMode::Zero
    }

    pub fn label(self) -> &'static str {
        match self {
            JerkMode::Free => "JF",
            JerkMode::Zero => "J0",
        }
    }

    /// Number of constrained derivative orders per endpoint.
    pub fn orders(self) -> usize {
        match self {
            JerkMode::Free => 3,
            JerkMode::Zero => 4,
        }
    }

    /// Number of dependent (constraint-determined) coefficients.
    pub fn dependent(self) -> usize {
        2 * self.orders()
    }

    /// Smallest degree that satisfies every constraint.
    pub fn min_degree(self) -> usize {
        self.dependent() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionTask {
    theta_a: f64,
    theta_b: f64,
    t_a: f64,
    t_b: f64,
    mode: JerkMode,
    degree: usize,
}

impl MotionTask {
    pub fn new(theta_a: f64, theta_b: f64, t_a: f64, t_b: f64, mode: JerkMode, degree: usize) -> Result<Self> {
        if ![theta_a, theta_b, t_a, t_b].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidTask("non-finite endpoint".into()));
        }
        if t_b <= t_a {
            return Err(Error::InvalidTask(format!("t_B ({t_b}) must exceed t_A ({t_a})")));
        }
        if theta_b == theta_a {
            return Err(Error::InvalidTask("zero-length motion (theta_A = theta_B)".into()));
        }
        if degree < mode.min_degree() {
            return Err(Error::InvalidTask(format!(
                "degree {degree} below the minimum {} for {} profiles",
                mode.min_degree(),
                mode.label()
            )));
        }
        Ok(Self { theta_a, theta_b, t_a, t_b, mode, degree })
    }

    pub fn theta_a(&self) -> f64 {
        self.theta_a
    }
    pub fn theta_b(&self) -> f64 {
        self.theta_b
    }
    pub fn t_a(&self) -> f64 {
        self.t_a
    }
    pub fn t_b(&self) -> f64 {
        self.t_b
    }
    pub fn mode(&self) -> JerkMode {
        self.mode
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn duration(&self) -> f64 {
        self.t_b - self.t_a
    }
    pub fn displacement(&self) -> f64 {
        self.theta_b - self.theta_a
    }

    /// Number of free coefficients.
    pub fn dof(&self) -> usize {
        self.degree + 1 - self.mode.dependent()
    }

    pub fn with_degree(&self, degree: usize) -> Result<Self> {
        Self::new(self.theta_a, self.theta_b, self.t_a, self.t_b, self.mode, degree)
    }

    pub fn with_mode(&self, mode: JerkMode, degree: usize) -> Result<Self> {
        Self::new(self.theta_a, self.theta_b, self.t_a, self.t_b, mode, degree)
    }

    pub fn scale(&self) -> ScaleFactors {
        scale_factors(self)
    }
}

/// Constants of the affine maps `t = a x + b` and `phi = c theta + d`, with
/// `e = 1/c` the half displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFactors {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    theta_a: f64,
    theta_b: f64,
}

pub fn scale_factors(task: &MotionTask) -> ScaleFactors {
    ScaleFactors::new(task.t_a, task.t_b, task.theta_a, task.theta_b)
}

impl ScaleFactors {
    fn new(t_a: f64, t_b: f64, theta_a: f64, theta_b: f64) -> Self {
        let span = theta_b - theta_a;
        Self {
            a: 0.5 * (t_b - t_a),
            b: 0.5 * (t_b + t_a),
            c: 2.0 / span,
            d: -(theta_b + theta_a) / span,
            e: 0.5 * span,
            theta_a,
            theta_b,
        }
    }

    /// Position-only scaling for `theta_A -> -1`, `theta_B -> 1`.
    pub fn for_positions(theta_a: f64, theta_b: f64) -> Result<Self> {
        if !(theta_a.is_finite() && theta_b.is_finite()) || theta_a == theta_b {
            return Err(Error::InvalidTask("degenerate position range".into()));
        }
        Ok(Self::new(-1.0, 1.0, theta_a, theta_b))
    }

    pub fn theta_a(&self) -> f64 {
        self.theta_a
    }

    pub fn theta_b(&self) -> f64 {
        self.theta_b
    }

    /// `phi = c theta + d`, arranged so that the endpoints map to exactly -1 and 1.
    pub fn phi_of_theta(&self, theta: f64) -> f64 {
        (2.0 * theta - (self.theta_a + self.theta_b)) / (self.theta_b - self.theta_a)
    }

    pub fn theta_of_phi(&self, phi: f64) -> f64 {
        (phi - self.d) / self.c
    }

    pub fn t_of_x(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    pub fn x_of_t(&self, t: f64) -> f64 {
        (t - self.b) / self.a
    }

    /// `dtheta/dt` per unit `dphi/dx`.
    pub fn velocity_factor(&self) -> f64 {
        1.0 / (self.a * self.c)
    }

    pub fn acceleration_factor(&self) -> f64 {
        1.0 / (self.a * self.a * self.c)
    }

    pub fn jerk_factor(&self) -> f64 {
        1.0 / (self.a * self.a * self.a * self.c)
    }

    /// Whether both scalings describe the same position interval.
    pub fn same_positions(&self, other: &ScaleFactors) -> bool {
        self.theta_a == other.theta_a && self.theta_b == other.theta_b
    }
}

/// Affine map from the free coefficients to the full coefficient vector:
/// `p(o) = base + sensitivity * o`.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    mode: JerkMode,
    degree: usize,
    base: Vec<f64>,
    sensitivity: DMatrix<f64>,
}

impl ConstraintSystem {
    pub fn new(mode: JerkMode, degree: usize) -> Result<Self> {
        if degree < mode.min_degree() {
            return Err(Error::InvalidTask(format!("degree {degree} too small for {}", mode.label())));
        }
        let m = mode.dependent();
        let orders = mode.orders();
        let dof = degree + 1 - m;
        let rows: Vec<(End, usize)> =
            [End::Lower, End::Upper].into_iter().flat_map(|end| (0..orders).map(move |k| (end, k))).collect();

        let entry = |i: usize, (end, k): (End, usize)| endpoint_derivative(i, k, end).expect("order <= 3");
        let dep = DMatrix::from_fn(m, m, |r, j| entry(j, rows[r]));
        let free = DMatrix::from_fn(m, dof, |r, i| entry(m + i, rows[r]));
        let rhs = DVector::from_fn(m, |r, _| match rows[r] {
            (End::Lower, 0) => -1.0,
            (End::Upper, 0) => 1.0,
            _ => 0.0,
        });

        let lu = dep.lu();
        let dep_base = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Internal("singular boundary-constraint matrix".into()))?;
        let dep_sens = lu
            .solve(&(-free))
            .ok_or_else(|| Error::Internal("singular boundary-constraint matrix".into()))?;

        let mut base = vec![0.0; degree + 1];
        base[..m].copy_from_slice(dep_base.as_slice());
        let mut sensitivity = DMatrix::zeros(degree + 1, dof);
        for i in 0..dof {
            for r in 0..m {
                sensitivity[(r, i)] = dep_sens[(r, i)];
            }
            sensitivity[(m + i, i)] = 1.0;
        }
        Ok(Self { mode, degree, base, sensitivity })
    }

    pub fn mode(&self) -> JerkMode {
        self.mode
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dof(&self) -> usize {
        self.sensitivity.ncols()
    }

    /// Coefficients of the minimal-degree constrained polynomial (o = 0).
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn sensitivity(&self) -> &DMatrix<f64> {
        &self.sensitivity
    }

    pub fn full_coeffs(&self, free: &[f64]) -> Result<Vec<f64>> {
        if free.len() != self.dof() {
            return Err(Error::Dimension { expected: self.dof(), got: free.len() });
        }
        let m = self.mode.dependent();
        let mut p = self.base.clone();
        for r in 0..m {
            p[r] += (0..free.len()).map(|i| self.sensitivity[(r, i)] * free[i]).sum::<f64>();
        }
        p[m..].copy_from_slice(free);
        Ok(p)
    }
}

/// Value and first two derivatives of a rescaled path with respect to `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
}

/// Anything that can be evaluated on the rescaled square.
pub trait RescaledPath {
    fn task(&self) -> &MotionTask;

    /// State at `x`; callers guarantee `|x| <= 1`.
    fn state(&self, x: f64) -> PathState;

    /// Interior points where the path is not smooth. Quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionProfile {
    task: MotionTask,
    phi: ChebyshevSeries,
    dphi: ChebyshevSeries,
    ddphi: ChebyshevSeries,
    dddphi: ChebyshevSeries,
    free_coeffs: Vec<f64>,
}

/// Solves the boundary conditions for the dependent coefficients given the
/// free ones.
pub fn eliminate_constraints(free_coeffs: &[f64], task: &MotionTask) -> Result<MotionProfile> {
    let system = ConstraintSystem::new(task.mode, task.degree)?;
    MotionProfile::from_system(&system, free_coeffs, task)
}

impl MotionProfile {
    pub fn from_system(system: &ConstraintSystem, free_coeffs: &[f64], task: &MotionTask) -> Result<Self> {
        if system.mode() != task.mode || system.degree() != task.degree {
            return Err(Error::Invalid("constraint system does not match the task".into()));
        }
        let full = system.full_coeffs(free_coeffs)?;
        Self::from_parts(*task, ChebyshevSeries::new(full)?, free_coeffs.to_vec())
    }

    /// Rebuilds a profile from a stored full coefficient vector, checking the
    /// boundary conditions.
    pub fn from_coefficients(task: &MotionTask, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != task.degree + 1 {
            return Err(Error::Dimension { expected: task.degree + 1, got: coeffs.len() });
        }
        let free = coeffs[task.mode.dependent()..].to_vec();
        let profile = Self::from_parts(*task, ChebyshevSeries::new(coeffs)?, free)?;
        let worst = profile.boundary_residuals().into_iter().fold(0.0, f64::max);
        if worst > BOUNDARY_TOLERANCE {
            return Err(Error::Invalid(format!("coefficients violate the boundary conditions (residual {worst:e})")));
        }
        Ok(profile)
    }

    fn from_parts(task: MotionTask, phi: ChebyshevSeries, free_coeffs: Vec<f64>) -> Result<Self> {
        let dphi = phi.derivative();
        let ddphi = dphi.derivative();
        let dddphi = ddphi.derivative();
        Ok(Self { task, phi, dphi, ddphi, dddphi, free_coeffs })
    }

    pub fn task(&self) -> &MotionTask {
        &self.task
    }

    pub fn phi(&self) -> &ChebyshevSeries {
        &self.phi
    }

    pub fn coeffs(&self) -> &[f64] {
        self.phi.coeffs()
    }

    pub fn free_coeffs(&self) -> &[f64] {
        &self.free_coeffs
    }

    pub fn scale(&self) -> ScaleFactors {
        self.task.scale()
    }

    /// Rescaled jerk `d^3 phi / dx^3`.
    pub fn jerk(&self, x: f64) -> f64 {
        self.dddphi.eval_unchecked(x)
    }

    /// Absolute violations of every active boundary condition, ordered lower
    /// end then upper end, derivative order ascending.
    pub fn boundary_residuals(&self) -> Vec<f64> {
        let series = [&self.phi, &self.dphi, &self.ddphi, &self.dddphi];
        let mut out = Vec::with_capacity(8);
        for end in [End::Lower, End::Upper] {
            for (k, s) in series.iter().take(self.task.mode.orders()).enumerate() {
                let target = if k == 0 { end.x() } else { 0.0 };
                out.push((s.eval_unchecked(end.x()) - target).abs());
            }
        }
        out
    }

    /// Minimum and maximum of `phi` on a uniform grid of `points` samples.
    pub fn phi_range(&self, points: usize) -> (f64, f64) {
        let points = points.max(2);
        (0..points)
            .map(|i| self.phi.eval_unchecked(-1.0 + 2.0 * i as f64 / (points - 1) as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

impl RescaledPath for MotionProfile {
    fn task(&self) -> &MotionTask {
        &self.task
    }

    fn state(&self, x: f64) -> PathState {
        PathState {
            phi: self.phi.eval_unchecked(x),
            dphi: self.dphi.eval_unchecked(x),
            ddphi: self.ddphi.eval_unchecked(x),
        }
    }
}

/// Trapezoidal velocity law with equal thirds for acceleration, cruise and
/// deceleration. On the rescaled square the peak speed is 1.5 and the
/// acceleration magnitude 2.25.
#[derive(Debug, Clone, PartialEq)]
pub struct Trapezoid13 {
    task: MotionTask,
}

impl Trapezoid13 {
    pub const PEAK_SPEED: f64 = 1.5;
    pub const ACCELERATION: f64 = 2.25;

    pub fn new(task: &MotionTask) -> Self {
        Self { task: *task }
    }

    pub fn sampled(&self, points: usize) -> SampledProfile {
        SampledProfile::from_path(self, points)
    }
}

impl RescaledPath for Trapezoid13 {
    fn task(&self) -> &MotionTask {
        &self.task
    }

    fn state(&self, x: f64) -> PathState {
        let acc = Self::ACCELERATION;
        let third = 1.0 / 3.0;
        if x <= -third {
            let u = x + 1.0;
            PathState { phi: -1.0 + 0.5 * acc * u * u, dphi: acc * u, ddphi: acc }
        } else if x < third {
            PathState { phi: Self::PEAK_SPEED * x, dphi: Self::PEAK_SPEED, ddphi: 0.0 }
        } else {
            let u = 1.0 - x;
            PathState { phi: 1.0 - 0.5 * acc * u * u, dphi: acc * u, ddphi: -acc }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![-1.0 / 3.0, 1.0 / 3.0]
    }
}

/// Dense samples of a rescaled path on a uniform `x` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub ddphi: Vec<f64>,
}

impl SampledProfile {
    pub fn from_path<P: RescaledPath + ?Sized>(path: &P, points: usize) -> Self {
        let points = points.max(2);
        let x: Vec<f64> = (0..points).map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64).collect();
        let states: Vec<PathState> = x.iter().map(|&x| path.state(x)).collect();
        Self {
            phi: states.iter().map(|s| s.phi).collect(),
            dphi: states.iter().map(|s| s.dphi).collect(),
            ddphi: states.iter().map(|s| s.ddphi).collect(),
            x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceKind {
    #[serde(rename = "poly5")]
    Poly5,
    #[serde(rename = "poly7J0")]
    Poly7J0,
    #[serde(rename = "trapezoid13")]
    Trapezoid13,
}

impl ReferenceKind {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::Poly5 => "poly5",
            ReferenceKind::Poly7J0 => "poly7J0",
            ReferenceKind::Trapezoid13 => "trapezoid13",
        }
    }

    /// Polynomial reference matching a constraint mode.
    pub fn for_mode(mode: JerkMode) -> Self {
        match mode {
            JerkMode::Free => ReferenceKind::Poly5,
            JerkMode::Zero => ReferenceKind::Poly7J0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceProfile {
    Polynomial(MotionProfile),
    Sampled(SampledProfile),
}

/// Reference profile for the task endpoints. The polynomial references use
/// their own minimal degree and constraint mode regardless of the task's.
pub fn reference_profile(kind: ReferenceKind, task: &MotionTask) -> Result<ReferenceProfile> {
    Ok(match kind {
        ReferenceKind::Poly5 | ReferenceKind::Poly7J0 => ReferenceProfile::Polynomial(polynomial_reference(kind, task)?),
        ReferenceKind::Trapezoid13 => {
            ReferenceProfile::Sampled(Trapezoid13::new(task).sampled(DEFAULT_SAMPLED_POINTS))
        }
    })
}

/// The polynomial reference as a [`MotionProfile`].
pub fn polynomial_reference(kind: ReferenceKind, task: &MotionTask) -> Result<MotionProfile> {
    let mode = match kind {
        ReferenceKind::Poly5 => JerkMode::Free,
        ReferenceKind::Poly7J0 => JerkMode::Zero,
        ReferenceKind::Trapezoid13 => return Err(Error::Invalid("trapezoid13 is not polynomial".into())),
    };
    let task = task.with_mode(mode, mode.min_degree())?;
    eliminate_constraints(&[], &task)
}

/// Physical kinematics sampled at rescaled abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub time: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_dot: Vec<f64>,
    pub theta_ddot: Vec<f64>,
    pub jerk: Vec<f64>,
}

pub fn kinematics(profile: &MotionProfile, x_grid: &[f64]) -> Result<Kinematics> {
    if let Some(&bad) = x_grid.iter().find(|x| !(-1.0..=1.0).contains(*x)) {
        return Err(Error::Domain { value: bad });
    }
    let s = profile.scale();
    let mut k = Kinematics {
        time: Vec::with_capacity(x_grid.len()),
        theta: Vec::with_capacity(x_grid.len()),
        theta_dot: Vec::with_capacity(x_grid.len()),
        theta_ddot: Vec::with_capacity(x_grid.len()),
        jerk: Vec::with_capacity(x_grid.len()),
    };
    for &x in x_grid {
        let st = profile.state(x);
        k.time.push(s.t_of_x(x));
        k.theta.push(s.theta_of_phi(st.phi));
        k.theta_dot.push(st.dphi * s.velocity_factor());
        k.theta_ddot.push(st.ddphi * s.acceleration_factor());
        k.jerk.push(profile.jerk(x) * s.jerk_factor());
    }
    Ok(k)
}
