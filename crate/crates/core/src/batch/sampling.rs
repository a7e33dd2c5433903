//! Resampling primitives shared by the batch trainers.

use crate::data::{Dataset, Label};
use crate::error::Result;
use crate::learners::BaseLearner;
use crate::rng::RngStream;

/// `round(x)` with halves rounded up; negative inputs give 0.
pub fn round_half_up(x: f64) -> usize {
    if x <= 0.0 {
        0
    } else {
        (x + 0.5).floor() as usize
    }
}

/// Replica size: `round_half_up(x)` but never below one.
pub fn replica_size(x: f64) -> usize {
    round_half_up(x).max(1)
}

/// `count` draws with replacement, uniform over `pool`.
pub fn sample_uniform(pool: &[usize], count: usize, rng: &mut RngStream) -> Vec<usize> {
    if pool.is_empty() {
        return Vec::new();
    }
    (0..count).map(|_| pool[rng.below(pool.len())]).collect()
}

/// `count` draws with replacement from `pool`, proportional to `weights[pool[i]]`.
pub fn sample_weighted(pool: &[usize], weights: &[f64], count: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(pool.len());
    let mut total = 0.0;
    for &i in pool {
        total += weights[i];
        cumulative.push(total);
    }
    if pool.is_empty() || total <= 0.0 {
        return sample_uniform(pool, count, rng);
    }
    (0..count)
        .map(|_| {
            let target = rng.uniform() * total;
            let pos = cumulative.partition_point(|&c| c <= target).min(pool.len() - 1);
            pool[pos]
        })
        .collect()
}

/// Keeps `keep` of `items` chosen uniformly without replacement, preserving order.
/// Keeping everything consumes no randomness.
pub fn subsample_preserving_order<T: Clone>(items: &[T], keep: usize, rng: &mut RngStream) -> Vec<T> {
    if keep >= items.len() {
        return items.to_vec();
    }
    let mut positions: Vec<usize> = (0..items.len()).collect();
    // partial Fisher-Yates: the first `keep` slots become the kept sample
    for i in 0..keep {
        let j = i + rng.below(items.len() - i);
        positions.swap(i, j);
    }
    let mut kept = positions[..keep].to_vec();
    kept.sort_unstable();
    kept.into_iter().map(|p| items[p].clone()).collect()
}

/// A training multiset: indices into a dataset plus synthetic positives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub indices: Vec<usize>,
    pub synthetic: Vec<Vec<f64>>,
}

impl TrainingSet {
    pub fn from_indices(indices: Vec<usize>) -> Self {
        Self { indices, synthetic: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.indices.len() + self.synthetic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of presented instances per class, synthetics counted as positive.
    pub fn class_sizes(&self, data: &Dataset) -> (usize, usize) {
        let pos = self.indices.iter().filter(|&&i| data.get(i).label.is_positive()).count();
        (pos + self.synthetic.len(), self.indices.len() - pos)
    }

    /// Trains a fresh learner on the multiset, originals first.
    pub fn fit(&self, data: &Dataset, mut learner: BaseLearner) -> Result<BaseLearner> {
        for &i in &self.indices {
            learner.update(data.get(i))?;
        }
        for s in &self.synthetic {
            learner.update_raw(s, Label::Positive)?;
        }
        Ok(learner)
    }
}
