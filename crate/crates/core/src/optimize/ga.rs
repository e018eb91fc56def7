//! Real-coded genetic algorithm over a box.
//!
//! Tournament selection, blend (BLX-alpha) crossover, Gaussian mutation with
//! clipping to the box, and elitism. Fitness evaluation runs in parallel but
//! all random draws happen on the calling thread, so a seed fixes the run.
//!
//! The mutation scale adapts: it shrinks by `sigma_shrink` for every
//! generation without a new best and grows back by `1 / sigma_shrink` after
//! one. Good profiles sit in a region that is orders of magnitude smaller
//! than the coefficient box, so a fixed scale never resolves it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaOptions {
    /// Population size; `None` means `max(20 * dof, 60)`.
    pub population: Option<usize>,
    pub max_generations: usize,
    pub stall_generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / dof`.
    pub mutation_rate: Option<f64>,
    /// Mutation standard deviation as a fraction of the box width.
    pub mutation_sigma: f64,
    pub elitism: usize,
    pub blend_alpha: f64,
    /// Factor applied to the mutation scale after a generation without
    /// improvement; its inverse is applied after an improvement.
    pub sigma_shrink: f64,
    /// Lower limit of the mutation scale, as a fraction of `mutation_sigma`.
    pub sigma_floor: f64,
    /// Largest standard deviation of the initial perturbations around zero,
    /// as a fraction of the box width.
    pub init_spread: f64,
    /// Smallest such standard deviation. Each perturbed individual draws its
    /// own spread log-uniformly between the two.
    pub init_spread_min: f64,
}

impl Default for GaOptions {
    fn default() -> Self {
        Self {
            population: None,
            max_generations: 300,
            stall_generations: 50,
            tournament_size: 3,
            crossover_rate: 0.9,
            mutation_rate: None,
            mutation_sigma: 0.1,
            elitism: 2,
            blend_alpha: 0.5,
            sigma_shrink: 0.85,
            sigma_floor: 1e-6,
            init_spread: 1e-2,
            init_spread_min: 1e-6,
        }
    }
}

impl GaOptions {
    pub fn population_for(&self, dof: usize) -> usize {
        self.population.unwrap_or_else(|| (20 * dof).max(60))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("genetic algorithm: {m}")));
        if self.population.is_some_and(|p| p < 4) {
            return bad("population must be at least 4");
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be positive");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover rate must be in [0, 1]");
        }
        if self.mutation_rate.is_some_and(|r| !(0.0..=1.0).contains(&r)) {
            return bad("mutation rate must be in [0, 1]");
        }
        if !(self.mutation_sigma >= 0.0 && self.blend_alpha >= 0.0) {
            return bad("spreads must be non-negative");
        }
        if !(self.init_spread_min > 0.0 && self.init_spread >= self.init_spread_min) {
            return bad("initial spreads must satisfy 0 < init_spread_min <= init_spread");
        }
        if !(self.sigma_shrink > 0.0 && self.sigma_shrink <= 1.0) {
            return bad("sigma shrink must be in (0, 1]");
        }
        if !(self.sigma_floor > 0.0 && self.sigma_floor <= 1.0) {
            return bad("sigma floor must be in (0, 1]");
        }
        if self.stall_generations == 0 {
            return bad("stall generations must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub generations: usize,
    pub evaluations: usize,
    /// Stopped because the best value stalled rather than by the generation cap.
    pub stalled: bool,
}

/// Minimizes `f` over the box `bounds`. `observe` sees every evaluated
/// population.
pub fn minimize<F, O>(f: &F, bounds: &[(f64, f64)], opts: &GaOptions, seed: u64, mut observe: O) -> GaOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
    O: FnMut(usize, &[Vec<f64>]),
{
    let dof = bounds.len();
    let score = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if dof == 0 {
        let v = score(&[]);
        return GaOutcome { x: vec![], f: v, generations: 0, evaluations: 1, stalled: true };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = opts.population_for(dof);
    let elites = opts.elitism.min(size);
    let mutation_rate = opts.mutation_rate.unwrap_or(1.0 / dof as f64);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let clip = |x: &mut [f64]| {
        for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *v = v.clamp(lo, hi);
        }
    };

    let mut population: Vec<Vec<f64>> = Vec::with_capacity(size);
    population.push(bounds.iter().map(|&(lo, hi)| 0.0f64.clamp(lo, hi)).collect());
    let (log_lo, log_hi) = (opts.init_spread_min.ln(), opts.init_spread.ln());
    while population.len() < size.div_ceil(2) {
        let spread = if log_hi > log_lo { rng.random_range(log_lo..=log_hi).exp() } else { opts.init_spread };
        let mut x: Vec<f64> =
            bounds.iter().map(|&(lo, hi)| spread * (hi - lo) * std_normal.sample(&mut rng)).collect();
        clip(&mut x);
        population.push(x);
    }
    while population.len() < size {
        population.push(bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect());
    }

    let mut best_x = population[0].clone();
    let mut best_f = f64::INFINITY;
    let mut evaluations = 0;
    let mut stall = 0;
    let mut generation = 0;
    let mut sigma = 1.0f64;
    let stalled = loop {
        let fitness: Vec<f64> = population.par_iter().map(|x| score(x)).collect();
        evaluations += population.len();
        observe(generation, &population);

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&i, &j| fitness[i].total_cmp(&fitness[j]).then(i.cmp(&j)));
        if fitness[order[0]] < best_f {
            best_f = fitness[order[0]];
            best_x = population[order[0]].clone();
            stall = 0;
            sigma = (sigma / opts.sigma_shrink).min(1.0);
        } else {
            stall += 1;
            sigma = (sigma * opts.sigma_shrink).max(opts.sigma_floor);
        }
        generation += 1;
        if stall >= opts.stall_generations {
            break true;
        }
        if generation >= opts.max_generations {
            break false;
        }

        let tournament = |rng: &mut ChaCha8Rng| {
            (0..opts.tournament_size)
                .map(|_| rng.random_range(0..population.len()))
                .min_by(|&i, &j| fitness[i].total_cmp(&fitness[j]).then(i.cmp(&j)))
                .expect("tournament size is positive")
        };

        let mut next: Vec<Vec<f64>> = order[..elites].iter().map(|&i| population[i].clone()).collect();
        while next.len() < size {
            let (a, b) = (tournament(&mut rng), tournament(&mut rng));
            let (mut c1, mut c2) = (population[a].clone(), population[b].clone());
            if rng.random::<f64>() < opts.crossover_rate {
                for k in 0..dof {
                    let (lo, hi) = (c1[k].min(c2[k]), c1[k].max(c2[k]));
                    let pad = opts.blend_alpha * (hi - lo);
                    let (l, h) = (lo - pad, hi + pad);
                    if h > l {
                        c1[k] = rng.random_range(l..=h);
                        c2[k] = rng.random_range(l..=h);
                    }
                }
            }
            for child in [&mut c1, &mut c2] {
                for (v, &(lo, hi)) in child.iter_mut().zip(bounds) {
                    if rng.random::<f64>() < mutation_rate {
                        *v += sigma * opts.mutation_sigma * (hi - lo) * std_normal.sample(&mut rng);
                    }
                }
                clip(child);
            }
            next.push(c1);
            if next.len() < size {
                next.push(c2);
            }
        }
        population = next;
    };

    GaOutcome { x: best_x, f: best_f, generations: generation, evaluations, stalled }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_shifted() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v - 0.1 * i as f64).powi(2)).sum::<f64>();
        let bounds = vec![(-1.0, 1.0); 4];
        let out = minimize(&f, &bounds, &GaOptions::default(), 7, |_, _| {});
        assert!(out.f < 1e-8, "{}", out.f);
    }

    #[test]
    fn respects_bounds_and_is_reproducible() {
        let f = |x: &[f64]| (x[0] - 5.0).powi(2) + x[1].powi(2);
        let bounds = [(-1.0, 1.0), (-0.5, 2.0)];
        let mut inside = true;
        let a = minimize(&f, &bounds, &GaOptions::default(), 3, |_, pop| {
            inside &= pop.iter().all(|x| x.iter().zip(&bounds).all(|(v, (lo, hi))| v >= lo && v <= hi));
        });
        assert!(inside);
        assert!((a.x[0] - 1.0).abs() < 1e-9);
        let b = minimize(&f, &bounds, &GaOptions::default(), 3, |_, _| {});
        assert_eq!(a.x, b.x);
        assert_eq!(a.generations, b.generations);
    }

    #[test]
    fn options_validation() {
        assert!(GaOptions::default().validate().is_ok());
        assert!(GaOptions { crossover_rate: 1.5, ..Default::default() }.validate().is_err());
        assert!(GaOptions { tournament_size: 0, ..Default::default() }.validate().is_err());
    }
}
