use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::{random_point, Variation};
use super::SearchSpace;
use crate::error::{Error, Result};

/// Settings of the single-objective genetic algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub elite_count: usize,
    pub max_generations: usize,
    /// Stop once the best fitness is at or below this value.
    pub target: Option<f64>,
    /// Stop after this many generations without improvement.
    pub stall_generations: Option<usize>,
    pub variation: Variation,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 20,
            elite_count: 2,
            max_generations: 100,
            target: None,
            stall_generations: None,
            variation: Variation::default(),
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidTuner("population must be at least 2".into()));
        }
        if self.elite_count >= self.population {
            return Err(Error::InvalidTuner("elite count must be below the population size".into()));
        }
        self.variation.validate().map_err(Error::InvalidTuner)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness so far after each generation, starting with the initial population.
    pub history: Vec<f64>,
    pub evaluations: usize,
    pub seed: u64,
}

fn evaluate<F>(pop: &[Vec<f64>], fitness: &F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pop.par_iter()
        .map(|x| {
            let f = fitness(x);
            if f.is_nan() { f64::INFINITY } else { f }
        })
        .collect()
}

fn tournament(fit: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let a = rng.random_range(0..fit.len());
    let b = rng.random_range(0..fit.len());
    if fit[b] < fit[a] { b } else { a }
}

/// Minimize `fitness` over `space`. NaN fitness counts as infinitely bad.
pub fn ga_optimize<F>(space: &SearchSpace, fitness: F, cfg: &GaConfig) -> Result<GaResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop: Vec<Vec<f64>> = (0..cfg.population).map(|_| random_point(space, &mut rng)).collect();
    let mut fit = evaluate(&pop, &fitness);
    let mut evaluations = pop.len();

    let mut order: Vec<usize> = (0..pop.len()).collect();
    let sort = |order: &mut Vec<usize>, fit: &[f64]| order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]));
    sort(&mut order, &fit);
    let mut best = pop[order[0]].clone();
    let mut best_fitness = fit[order[0]];
    let mut history = vec![best_fitness];
    let mut stall = 0;

    for _ in 0..cfg.max_generations {
        if cfg.target.is_some_and(|t| best_fitness <= t) {
            break;
        }
        if cfg.stall_generations.is_some_and(|s| stall >= s) {
            break;
        }
        let mut next: Vec<Vec<f64>> = order[..cfg.elite_count].iter().map(|&i| pop[i].clone()).collect();
        let mut next_fit: Vec<f64> = order[..cfg.elite_count].iter().map(|&i| fit[i]).collect();
        let mut children = Vec::with_capacity(cfg.population - cfg.elite_count);
        while next.len() + children.len() < cfg.population {
            let a = tournament(&fit, &mut rng);
            let b = tournament(&fit, &mut rng);
            children.push(cfg.variation.offspring(&pop[a], &pop[b], space, &mut rng));
        }
        next_fit.extend(evaluate(&children, &fitness));
        evaluations += children.len();
        next.extend(children);
        pop = next;
        fit = next_fit;
        order = (0..pop.len()).collect();
        sort(&mut order, &fit);
        if fit[order[0]] < best_fitness {
            best_fitness = fit[order[0]];
            best = pop[order[0]].clone();
            stall = 0;
        } else {
            stall += 1;
        }
        history.push(best_fitness);
    }
    Ok(GaResult { best, best_fitness, history, evaluations, seed: cfg.seed })
}

/// Independent runs from each seed; returns the best run first, then all runs
/// in seed order.
pub fn ga_optimize_restarts<F>(space: &SearchSpace, fitness: F, cfg: &GaConfig, seeds: &[u64]) -> Result<(GaResult, Vec<GaResult>)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if seeds.is_empty() {
        return Err(Error::InvalidTuner("at least one seed is required".into()));
    }
    let runs = seeds
        .iter()
        .map(|&seed| ga_optimize(space, &fitness, &GaConfig { seed, ..cfg.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let best = runs
        .iter()
        .min_by(|a, b| a.best_fitness.total_cmp(&b.best_fitness))
        .cloned()
        .expect("non-empty");
    Ok((best, runs))
}
