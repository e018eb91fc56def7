//! Chebyshev series of the first kind on `[-1, 1]`.
//!
//! Profiles and property models are both stored as coefficient vectors
//! `p_0..p_n` of `sum p_i T_i(x)`. Evaluation uses the Clenshaw recurrence;
//! the plain three-term recurrence is kept as [`eval_recurrence`] for
//! cross-checking.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order with a closed-form endpoint value.
pub const MAX_ENDPOINT_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ChebyshevSeries {
    coeffs: Vec<f64>,
}

/// Endpoint of the reference interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Lower,
    Upper,
}

impl End {
    pub fn x(self) -> f64 {
        match self {
            End::Lower => -1.0,
            End::Upper => 1.0,
        }
    }
}

impl ChebyshevSeries {
    /// Builds a series from `p_0..p_n`. An empty vector is the zero series.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Invalid(format!("non-finite Chebyshev coefficient {bad}")));
        }
        if coeffs.is_empty() {
            return Ok(Self::zero());
        }
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    /// The single basis polynomial `T_i`.
    pub fn basis(i: usize) -> Self {
        let mut coeffs = vec![0.0; i + 1];
        coeffs[i] = 1.0;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluates the series at `x`, rejecting `|x| > 1`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::Domain { value: x });
        }
        Ok(clenshaw(&self.coeffs, x))
    }

    /// Clenshaw evaluation without the domain check. Outside `[-1, 1]` this
    /// is the polynomial continuation of the series.
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, x)
    }

    /// Coefficients of `d/dx` of the series, one degree lower.
    pub fn derivative(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self::zero();
        }
        let c = &self.coeffs;
        let mut d = vec![0.0; n + 2];
        for k in (0..n).rev() {
            d[k] = d[k + 2] + 2.0 * (k + 1) as f64 * c[k + 1];
        }
        d[0] *= 0.5;
        d.truncate(n);
        Self { coeffs: d }
    }

    /// Converts `sum a_i x^i` into the Chebyshev basis.
    pub fn from_monomial(monomial: &[f64]) -> Self {
        if monomial.is_empty() {
            return Self::zero();
        }
        let n = monomial.len() - 1;
        let mut acc = vec![0.0; n + 1];
        acc[0] = monomial[n];
        let mut deg = 0;
        // Horner: acc <- acc * x + a_k, with x T_j = (T_{j+1} + T_{|j-1|}) / 2
        for &a in monomial[..n].iter().rev() {
            let mut next = vec![0.0; n + 1];
            for (j, &c) in acc.iter().enumerate().take(deg + 1) {
                if c == 0.0 {
                    continue;
                }
                if j == 0 {
                    next[1] += c;
                } else {
                    next[j + 1] += 0.5 * c;
                    next[j - 1] += 0.5 * c;
                }
            }
            next[0] += a;
            acc = next;
            deg += 1;
        }
        Self { coeffs: acc }
    }

    /// Converts back to monomial coefficients `a_0..a_n`.
    pub fn to_monomial(&self) -> Vec<f64> {
        let n = self.degree();
        let mut out = vec![0.0; n + 1];
        // monomial coefficients of T_{k-1} and T_k
        let mut prev = vec![0.0; n + 1];
        let mut cur = vec![0.0; n + 1];
        prev[0] = 1.0;
        out[0] += self.coeffs[0];
        if n == 0 {
            return out;
        }
        cur[1] = 1.0;
        for (o, t) in out.iter_mut().zip(&cur) {
            *o += self.coeffs[1] * t;
        }
        for k in 2..=n {
            let mut next = vec![0.0; n + 1];
            for i in 0..n {
                next[i + 1] += 2.0 * cur[i];
            }
            for (nx, p) in next.iter_mut().zip(&prev) {
                *nx -= p;
            }
            for (o, t) in out.iter_mut().zip(&next) {
                *o += self.coeffs[k] * t;
            }
            prev = cur;
            cur = next;
        }
        out
    }

    /// Coefficient-wise `self + other`.
    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| self.coeffs.get(i).copied().unwrap_or(0.0) + other.coeffs.get(i).copied().unwrap_or(0.0))
            .collect();
        Self { coeffs }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }
}

impl TryFrom<Vec<f64>> for ChebyshevSeries {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ChebyshevSeries> for Vec<f64> {
    fn from(s: ChebyshevSeries) -> Self {
        s.coeffs
    }
}

/// Clenshaw recurrence for `sum c_k T_k(x)`.
pub fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    match coeffs.len() {
        0 => 0.0,
        1 => coeffs[0],
        _ => {
            let two_x = 2.0 * x;
            let mut b1 = 0.0;
            let mut b2 = 0.0;
            for &c in coeffs[1..].iter().rev() {
                let b0 = two_x * b1 - b2 + c;
                b2 = b1;
                b1 = b0;
            }
            x * b1 - b2 + coeffs[0]
        }
    }
}

/// Reference evaluation through `T_{k+1} = 2x T_k - T_{k-1}`.
pub fn eval_recurrence(coeffs: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    let (mut t_prev, mut t) = (1.0, x);
    for (k, &c) in coeffs.iter().enumerate() {
        match k {
            0 => sum += c,
            1 => sum += c * x,
            _ => {
                let t_next = 2.0 * x * t - t_prev;
                t_prev = t;
                t = t_next;
                sum += c * t;
            }
        }
    }
    sum
}

/// `T_i^(k)(±1)` in closed form, `k <= 3`.
///
/// At the upper end `T_i^(k)(1) = prod_{j<k} (i^2 - j^2) / (2j + 1)`; the
/// lower end follows from `T_i^(k)(-1) = (-1)^(i+k) T_i^(k)(1)`.
pub fn endpoint_derivative(i: usize, k: usize, end: End) -> Result<f64> {
    if k > MAX_ENDPOINT_ORDER {
        return Err(Error::UnsupportedOrder(k));
    }
    let i2 = (i * i) as f64;
    let upper: f64 = (0..k).map(|j| (i2 - (j * j) as f64) / (2 * j + 1) as f64).product();
    Ok(match end {
        End::Upper => upper,
        End::Lower if (i + k) % 2 == 0 => upper,
        End::Lower => -upper,
    })
}

/// Magnitude bounds on the coefficients of any series with `|phi| <= 1` on
/// `[-1, 1]`: 1 for `p_0` and `4/pi` for every higher coefficient.
pub fn coefficient_bounds(n: usize) -> Vec<f64> {
    std::iter::once(1.0).chain(std::iter::repeat(4.0 / PI).take(n)).collect()
}

/// Number of trapezoid nodes on `[0, 2pi)` used by [`project_profile`].
pub fn projection_nodes(n: usize) -> usize {
    8 * n + 16
}

/// Projects `profile` onto `T_0..T_n` using the periodic trapezoid rule on
/// `phi(cos theta)`.
pub fn project_profile<F: Fn(f64) -> f64>(profile: F, n: usize) -> ChebyshevSeries {
    let m = projection_nodes(n);
    let h = 2.0 * PI / m as f64;
    let samples: Vec<(f64, f64)> = (0..m)
        .map(|j| {
            let theta = j as f64 * h;
            (theta, profile(theta.cos().clamp(-1.0, 1.0)))
        })
        .collect();
    let coeffs = (0..=n)
        .map(|l| {
            let s: f64 = samples.iter().map(|&(theta, f)| f * (l as f64 * theta).cos()).sum();
            if l == 0 {
                s / m as f64
            } else {
                2.0 * s / m as f64
            }
        })
        .collect();
    ChebyshevSeries { coeffs }
}
