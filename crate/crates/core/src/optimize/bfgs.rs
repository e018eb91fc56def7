//! BFGS with a strong-Wolfe line search and central finite-difference
//! gradients.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Stop when `||g||_inf < gradient_tolerance * max(1, |f|)`.
    pub gradient_tolerance: f64,
    /// Stop when the relative decrease stays below this for `stall_iterations`.
    pub relative_decrease: f64,
    pub stall_iterations: usize,
    /// Finite-difference step is `fd_step * max(1, |x_i|)`.
    pub fd_step: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            relative_decrease: 1e-12,
            stall_iterations: 3,
            fd_step: 1e-6,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Gradient,
    Stalled,
    MaxIterations,
    LineSearchFailed,
    /// Nothing to optimize.
    Empty,
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

impl BfgsOutcome {
    pub fn converged(&self) -> bool {
        matches!(self.termination, Termination::Gradient | Termination::Stalled | Termination::Empty)
    }
}

struct Counted<'a, F> {
    f: &'a F,
    evals: Cell<usize>,
    fd_step: f64,
}

impl<F: Fn(&[f64]) -> f64> Counted<'_, F> {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.evals.set(self.evals.get() + 1);
        let v = (self.f)(x.as_slice());
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut probe = x.clone();
        DVector::from_fn(x.len(), |i, _| {
            let h = self.fd_step * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = self.value(&probe);
            probe[i] = x[i] - h;
            let down = self.value(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
    }
}

struct Trial {
    alpha: f64,
    f: f64,
    g: DVector<f64>,
    slope: f64,
}

/// Minimizes `f` from `x0`. The returned point never has a larger objective
/// than `x0`.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], opts: &BfgsOptions) -> BfgsOutcome {
    let obj = Counted { f, evals: Cell::new(0), fd_step: opts.fd_step };
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = obj.value(&x);
    if n == 0 {
        return BfgsOutcome { x: vec![], f: fx, iterations: 0, evaluations: obj.evals.get(), termination: Termination::Empty };
    }
    let mut g = obj.gradient(&x);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut first = true;
    let mut stall = 0;
    let mut iterations = 0;
    let mut reset_tried = false;

    let termination = loop {
        if g.amax() < opts.gradient_tolerance * fx.abs().max(1.0) {
            break Termination::Gradient;
        }
        if iterations >= opts.max_iterations {
            break Termination::MaxIterations;
        }
        let mut d = -(&h * &g);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            h = DMatrix::identity(n, n);
            first = true;
            d = -g.clone();
            slope = g.dot(&d);
        }
        let alpha0 = if first { (1.0 / d.amax()).min(1.0) } else { 1.0 };
        let Some(trial) = line_search(&obj, &x, fx, slope, &d, alpha0, opts) else {
            if !reset_tried && !first {
                reset_tried = true;
                h = DMatrix::identity(n, n);
                first = true;
                continue;
            }
            break Termination::LineSearchFailed;
        };
        reset_tried = false;
        iterations += 1;

        let s = &d * trial.alpha;
        let y = &trial.g - &g;
        let ys = y.dot(&s);
        let decrease = (fx - trial.f) / fx.abs().max(f64::MIN_POSITIVE);
        x += &s;
        fx = trial.f;
        g = trial.g;

        if ys > 1e-14 * s.norm() * y.norm() {
            if first {
                h = DMatrix::identity(n, n) * (ys / y.dot(&y));
                first = false;
            }
            let rho = 1.0 / ys;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (s hy' + hy s') + (rho^2 y'Hy + rho) s s'
            h -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            h += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }

        if decrease < opts.relative_decrease {
            stall += 1;
            if stall >= opts.stall_iterations {
                break Termination::Stalled;
            }
        } else {
            stall = 0;
        }
    };

    BfgsOutcome { x: x.as_slice().to_vec(), f: fx, iterations, evaluations: obj.evals.get(), termination }
}

fn line_search<F: Fn(&[f64]) -> f64>(
    obj: &Counted<'_, F>,
    x: &DVector<f64>,
    f0: f64,
    slope0: f64,
    d: &DVector<f64>,
    alpha0: f64,
    opts: &BfgsOptions,
) -> Option<Trial> {
    let eval = |alpha: f64| {
        let xt = x + d * alpha;
        let f = obj.value(&xt);
        let g = if f.is_finite() { obj.gradient(&xt) } else { DVector::zeros(x.len()) };
        let slope = g.dot(d);
        Trial { alpha, f, g, slope }
    };
    let armijo = |t: &Trial| t.f <= f0 + opts.c1 * t.alpha * slope0;
    let curvature = |t: &Trial| t.slope.abs() <= -opts.c2 * slope0;

    let mut prev = Trial { alpha: 0.0, f: f0, g: DVector::zeros(0), slope: slope0 };
    let mut alpha = alpha0;
    for i in 0..opts.max_line_search {
        let cur = eval(alpha);
        if !armijo(&cur) || (i > 0 && cur.f >= prev.f) {
            return zoom(&eval, prev, cur, f0, slope0, opts);
        }
        if curvature(&cur) {
            return Some(cur);
        }
        if cur.slope >= 0.0 {
            return zoom(&eval, cur, prev, f0, slope0, opts);
        }
        alpha *= 2.0;
        prev = cur;
    }
    None
}

fn zoom<E: Fn(f64) -> Trial>(
    eval: &E,
    mut lo: Trial,
    mut hi: Trial,
    f0: f64,
    slope0: f64,
    opts: &BfgsOptions,
) -> Option<Trial> {
    let mut best: Option<Trial> = None;
    for _ in 0..opts.max_line_search {
        let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
        let width = b - a;
        if width <= 1e-16 * b.max(1e-300) {
            break;
        }
        let mut alpha = cubic_minimizer(&lo, &hi).unwrap_or(0.5 * (a + b));
        if !(alpha > a + 0.1 * width && alpha < b - 0.1 * width) {
            alpha = 0.5 * (a + b);
        }
        let cur = eval(alpha);
        if cur.f > f0 + opts.c1 * alpha * slope0 || cur.f >= lo.f {
            hi = cur;
        } else {
            if cur.slope.abs() <= -opts.c2 * slope0 {
                return Some(cur);
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = std::mem::replace(&mut lo, cur);
            } else {
                lo = cur;
            }
            if best.as_ref().is_none_or(|b| lo.f < b.f) {
                best = Some(Trial { alpha: lo.alpha, f: lo.f, g: lo.g.clone(), slope: lo.slope });
            }
        }
    }
    // Accept a point with sufficient decrease even if the curvature test failed.
    best.filter(|b| b.alpha > 0.0 && b.f < f0)
}

fn cubic_minimizer(p: &Trial, q: &Trial) -> Option<f64> {
    let d1 = p.slope + q.slope - 3.0 * (p.f - q.f) / (p.alpha - q.alpha);
    let disc = d1 * d1 - p.slope * q.slope;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = disc.sqrt() * (q.alpha - p.alpha).signum();
    let denom = q.slope - p.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let a = q.alpha - (q.alpha - p.alpha) * (q.slope + d2 - d1) / denom;
    a.is_finite().then_some(a)
}
