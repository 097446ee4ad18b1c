use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SearchSpace;

/// Real-coded variation operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variation {
    /// Probability that a child is produced by crossover rather than copied.
    pub crossover_ratio: f64,
    /// Per-gene mutation probability.
    pub mutation_ratio: f64,
    /// Extension of the intermediate-recombination interval beyond the parents.
    pub blend_alpha: f64,
    /// Mutation standard deviation as a fraction of each gene's range.
    pub mutation_scale: f64,
}

impl Default for Variation {
    fn default() -> Self {
        Self { crossover_ratio: 0.8, mutation_ratio: 0.2, blend_alpha: 0.25, mutation_scale: 0.1 }
    }
}

impl Variation {
    pub(crate) fn validate(&self) -> Result<(), String> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.crossover_ratio) || !unit(self.mutation_ratio) {
            return Err("crossover and mutation ratios must lie in [0, 1]".into());
        }
        if !(self.blend_alpha >= 0.0 && self.mutation_scale >= 0.0) {
            return Err("blend alpha and mutation scale must be non-negative".into());
        }
        Ok(())
    }

    /// One child from two parents: blend crossover (or copy of the first
    /// parent), then Gaussian mutation, then clipping into the box.
    pub(crate) fn offspring(&self, a: &[f64], b: &[f64], space: &SearchSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut child = if rng.random::<f64>() < self.crossover_ratio {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let r = rng.random_range(-self.blend_alpha..=1.0 + self.blend_alpha);
                    x + r * (y - x)
                })
                .collect()
        } else {
            a.to_vec()
        };
        for (i, v) in child.iter_mut().enumerate() {
            if rng.random::<f64>() < self.mutation_ratio {
                let sigma = self.mutation_scale * (space.upper[i] - space.lower[i]);
                if sigma > 0.0 {
                    *v += Normal::new(0.0, sigma).expect("positive sigma").sample(rng);
                }
            }
        }
        space.clip(&mut child);
        child
    }
}

pub(crate) fn random_point(space: &SearchSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    space
        .init_lower
        .iter()
        .zip(&space.init_upper)
        .map(|(&l, &u)| if u > l { rng.random_range(l..=u) } else { l })
        .collect()
}
