use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::{random_point, Variation};
use super::SearchSpace;
use crate::error::{Error, Result};

/// Settings of the multi-objective search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Nsga2Config {
    pub population: usize,
    /// Share of the population kept in the final archive.
    pub pareto_fraction: f64,
    pub max_generations: usize,
    pub variation: Variation,
    pub seed: u64,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Self { population: 100, pareto_fraction: 0.7, max_generations: 50, variation: Variation::default(), seed: 0 }
    }
}

impl Nsga2Config {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::InvalidTuner("population must be at least 4".into()));
        }
        if !(self.pareto_fraction > 0.0 && self.pareto_fraction <= 1.0) {
            return Err(Error::InvalidTuner("pareto fraction must lie in (0, 1]".into()));
        }
        self.variation.validate().map_err(Error::InvalidTuner)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoMember {
    pub params: Vec<f64>,
    pub objectives: Vec<f64>,
    pub crowding: f64,
}

/// Mutually non-dominated solutions, sorted by the first objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    pub members: Vec<ParetoMember>,
    pub generations: usize,
    pub evaluations: usize,
    pub seed: u64,
}

impl ParetoArchive {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Objective column `k` in archive order.
    pub fn objective(&self, k: usize) -> Vec<f64> {
        self.members.iter().map(|m| m.objectives[k]).collect()
    }
}

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Pareto rank of every point, 1 for the non-dominated set.
pub fn nondominated_sort(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominating: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i], &points[j]) {
                dominating[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominating[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut r = 1;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            rank[i] = r;
            for &j in &dominating[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        front = next;
        r += 1;
    }
    rank
}

/// Crowding distance of each point within one front. Boundary points, and
/// every point of a front with at most two members, get infinity.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut d = vec![0.0; n];
    for k in 0..front[0].len() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]));
        let lo = front[idx[0]][k];
        let hi = front[idx[n - 1]][k];
        d[idx[0]] = f64::INFINITY;
        d[idx[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if !(span > 0.0 && span.is_finite()) {
            continue;
        }
        for w in idx.windows(3) {
            d[w[1]] += (front[w[2]][k] - front[w[0]][k]) / span;
        }
    }
    d
}

/// Rank and crowding of a whole population.
fn rank_and_crowd(objs: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    let rank = nondominated_sort(objs);
    let mut crowd = vec![0.0; objs.len()];
    let max_rank = rank.iter().copied().max().unwrap_or(0);
    for r in 1..=max_rank {
        let members: Vec<usize> = (0..objs.len()).filter(|&i| rank[i] == r).collect();
        let pts: Vec<Vec<f64>> = members.iter().map(|&i| objs[i].clone()).collect();
        for (&i, c) in members.iter().zip(crowding_distance(&pts)) {
            crowd[i] = c;
        }
    }
    (rank, crowd)
}

/// Crowded-comparison order: lower rank first, then larger crowding, then index.
fn crowded_order(rank: &[usize], crowd: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rank.len()).collect();
    idx.sort_by(|&a, &b| rank[a].cmp(&rank[b]).then(crowd[b].total_cmp(&crowd[a])).then(a.cmp(&b)));
    idx
}

fn evaluate<F>(pop: &[Vec<f64>], objectives: &F) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pop.par_iter()
        .map(|x| objectives(x).into_iter().map(|v| if v.is_nan() { f64::INFINITY } else { v }).collect())
        .collect()
}

/// Minimize several objectives jointly with elitist non-dominated sorting.
pub fn nsga2_optimize<F>(space: &SearchSpace, objectives: F, cfg: &Nsga2Config) -> Result<ParetoArchive>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    cfg.validate()?;
    let n = cfg.population;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop: Vec<Vec<f64>> = (0..n).map(|_| random_point(space, &mut rng)).collect();
    let mut objs = evaluate(&pop, &objectives);
    if objs.iter().any(|o| o.is_empty() || o.len() != objs[0].len()) {
        return Err(Error::InvalidTuner("objective vectors must be non-empty and of equal length".into()));
    }
    let mut evaluations = n;
    let (mut rank, mut crowd) = rank_and_crowd(&objs);

    for _ in 0..cfg.max_generations {
        let pick = |rng: &mut ChaCha8Rng| {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let better = rank[b] < rank[a] || (rank[b] == rank[a] && crowd[b] > crowd[a]);
            if better { b } else { a }
        };
        let children: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let a = pick(&mut rng);
                let b = pick(&mut rng);
                cfg.variation.offspring(&pop[a], &pop[b], space, &mut rng)
            })
            .collect();
        let child_objs = evaluate(&children, &objectives);
        evaluations += n;
        pop.extend(children);
        objs.extend(child_objs);

        let (r, c) = rank_and_crowd(&objs);
        let keep: Vec<usize> = crowded_order(&r, &c).into_iter().take(n).collect();
        pop = keep.iter().map(|&i| pop[i].clone()).collect();
        objs = keep.iter().map(|&i| objs[i].clone()).collect();
        // Crowding is recomputed on the survivors so selection sees the
        // population it actually draws from.
        (rank, crowd) = rank_and_crowd(&objs);
    }

    // Distinct rank-1 members, most isolated first, truncated to the archive size.
    let mut front: Vec<usize> = Vec::new();
    for i in crowded_order(&rank, &crowd) {
        if rank[i] != 1 {
            break;
        }
        if !front.iter().any(|&j| pop[j] == pop[i]) {
            front.push(i);
        }
    }
    let cap = ((cfg.pareto_fraction * n as f64).ceil() as usize).max(1);
    front.truncate(cap);
    let mut members: Vec<ParetoMember> = front
        .into_iter()
        .map(|i| ParetoMember { params: pop[i].clone(), objectives: objs[i].clone(), crowding: crowd[i] })
        .collect();
    members.sort_by(|a, b| {
        a.objectives
            .iter()
            .zip(&b.objectives)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(ParetoArchive { members, generations: cfg.max_generations, evaluations, seed: cfg.seed })
}
