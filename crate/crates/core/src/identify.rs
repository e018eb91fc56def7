//! Viscous-friction identification from a recorded position/torque log.

use serde::Serialize;

use crate::cheb::ChebyshevSeries;
use crate::error::{Error, Result};
use crate::plant::{least_squares_chebyshev, motor_torque_physical, FrictionModel, PropertyModel};

/// Position-fit degree used when none is given.
pub const DEFAULT_POSITION_FIT_DEGREE: usize = 9;
pub const MIN_LOG_SAMPLES: usize = 20;
/// Allowed deviation of any time step from the mean step, in seconds.
pub const SAMPLING_JITTER: f64 = 1e-9;

/// Uniformly sampled measurement of motor position and torque.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementLog {
    time: Vec<f64>,
    position: Vec<f64>,
    torque: Vec<f64>,
}

impl MeasurementLog {
    pub fn new(time: Vec<f64>, position: Vec<f64>, torque: Vec<f64>) -> Result<Self> {
        let n = time.len();
        if position.len() != n {
            return Err(Error::Dimension { expected: n, got: position.len() });
        }
        if torque.len() != n {
            return Err(Error::Dimension { expected: n, got: torque.len() });
        }
        if n < MIN_LOG_SAMPLES {
            return Err(Error::Invalid(format!("measurement needs at least {MIN_LOG_SAMPLES} samples, got {n}")));
        }
        if time.iter().chain(&position).chain(&torque).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("measurement contains non-finite values".into()));
        }
        let step = (time[n - 1] - time[0]) / (n - 1) as f64;
        for (i, w) in time.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::Invalid(format!("time not strictly increasing at sample {}", i + 1)));
            }
            if ((w[1] - w[0]) - step).abs() > SAMPLING_JITTER {
                return Err(Error::Invalid(format!("non-uniform sampling at sample {}", i + 1)));
            }
        }
        Ok(Self { time, position, torque })
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn position(&self) -> &[f64] {
        &self.position
    }

    pub fn torque(&self) -> &[f64] {
        &self.torque
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.time[self.len() - 1] - self.time[0]) / (self.len() - 1) as f64
    }

    /// Copy with every time stamp shifted by `dt`.
    pub fn shifted(&self, dt: f64) -> Result<Self> {
        Self::new(self.time.iter().map(|t| t + dt).collect(), self.position.clone(), self.torque.clone())
    }
}

/// Smooth polynomial position model `theta_p(t)`, stored as a Chebyshev
/// series in `s = (2t - (t0 + t1)) / (t1 - t0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionFit {
    series: ChebyshevSeries,
    velocity: ChebyshevSeries,
    acceleration: ChebyshevSeries,
    t0: f64,
    t1: f64,
    /// Root-mean-square position residual over the log.
    pub rms_residual: f64,
    pub max_residual: f64,
}

impl PositionFit {
    fn s_of_t(&self, t: f64) -> f64 {
        (2.0 * t - (self.t0 + self.t1)) / (self.t1 - self.t0)
    }

    fn ds_dt(&self) -> f64 {
        2.0 / (self.t1 - self.t0)
    }

    pub fn degree(&self) -> usize {
        self.series.degree()
    }

    pub fn position(&self, t: f64) -> f64 {
        self.series.eval_unchecked(self.s_of_t(t))
    }

    pub fn velocity(&self, t: f64) -> f64 {
        self.velocity.eval_unchecked(self.s_of_t(t)) * self.ds_dt()
    }

    pub fn acceleration(&self, t: f64) -> f64 {
        self.acceleration.eval_unchecked(self.s_of_t(t)) * self.ds_dt().powi(2)
    }

    /// Coefficients `a_0..a_n` of the fit as a polynomial in physical time.
    pub fn monomial_coeffs(&self) -> Vec<f64> {
        // Expand sum c_k (alpha t + beta)^k by Horner in t.
        let alpha = self.ds_dt();
        let beta = -(self.t0 + self.t1) / (self.t1 - self.t0);
        let c = self.series.to_monomial();
        let mut out = vec![0.0; c.len()];
        for &ck in c.iter().rev() {
            // out <- out * (alpha t + beta) + ck
            let mut next = vec![0.0; c.len()];
            for (i, &v) in out.iter().enumerate() {
                next[i] += v * beta;
                if i + 1 < next.len() {
                    next[i + 1] += v * alpha;
                }
            }
            next[0] += ck;
            out = next;
        }
        out
    }
}

/// Least-squares polynomial fit of the measured position.
pub fn fit_position_polynomial(log: &MeasurementLog, degree: usize) -> Result<PositionFit> {
    if degree >= log.len() {
        return Err(Error::Fit(format!("degree {degree} needs more than {} samples", log.len())));
    }
    let (t0, t1) = (log.time[0], log.time[log.len() - 1]);
    let s: Vec<f64> = log.time.iter().map(|&t| ((2.0 * t - (t0 + t1)) / (t1 - t0)).clamp(-1.0, 1.0)).collect();
    let series = least_squares_chebyshev(&s, &log.position, degree)?;
    let velocity = series.derivative();
    let acceleration = velocity.derivative();
    let (mut sq, mut max) = (0.0, 0.0f64);
    for (&si, &p) in s.iter().zip(&log.position) {
        let r = series.eval_unchecked(si) - p;
        sq += r * r;
        max = max.max(r.abs());
    }
    Ok(PositionFit {
        series,
        velocity,
        acceleration,
        t0,
        t1,
        rms_residual: (sq / log.len() as f64).sqrt(),
        max_residual: max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrictionEstimate {
    pub mu_v: f64,
    /// Two-norm of measured minus friction-free model torque.
    pub residual_before: f64,
    /// Two-norm of measured minus identified model torque.
    pub residual_after: f64,
    pub signal_norm: f64,
    pub position_rms_residual: f64,
    pub samples: usize,
}

impl FrictionEstimate {
    pub fn friction(&self) -> Result<FrictionModel> {
        FrictionModel::new(self.mu_v.max(0.0))
    }
}

/// Closed-form least-squares viscous coefficient for a log against a
/// property model. The estimate is not clipped at zero.
pub fn identify_friction(log: &MeasurementLog, model: &PropertyModel, fit_degree: usize) -> Result<FrictionEstimate> {
    let fit = fit_position_polynomial(log, fit_degree)?;
    let (lo, hi) = model.theta_domain();
    let slack = 1e-3 * (hi - lo);
    let none = FrictionModel::none();
    let mut residual = Vec::with_capacity(log.len());
    let mut speed = Vec::with_capacity(log.len());
    for (&t, &tau) in log.time.iter().zip(&log.torque) {
        let theta = fit.position(t);
        if theta < lo - slack || theta > hi + slack {
            return Err(Error::Range { theta, lo, hi });
        }
        let model_tau = motor_torque_physical(theta.clamp(lo, hi), fit.velocity(t), fit.acceleration(t), model, &none)?;
        residual.push(tau - model_tau);
        speed.push(fit.velocity(t));
    }
    let ss: f64 = speed.iter().map(|s| s * s).sum();
    let peak = speed.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if !(ss > 0.0) || peak * (log.time[log.len() - 1] - log.time[0]) < 1e-9 * (hi - lo).max(1.0) {
        return Err(Error::Unidentifiable("motion has near-zero speed throughout the log".into()));
    }
    let rs: f64 = residual.iter().zip(&speed).map(|(r, s)| r * s).sum();
    let mu_v = rs / ss;
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    Ok(FrictionEstimate {
        mu_v,
        residual_before: norm(&mut residual.iter().copied()),
        residual_after: norm(&mut residual.iter().zip(&speed).map(|(r, s)| r - mu_v * s)),
        signal_norm: norm(&mut log.torque.iter().copied()),
        position_rms_residual: fit.rms_residual,
        samples: log.len(),
    })
}
