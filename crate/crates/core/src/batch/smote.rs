//! Synthetic minority oversampling.

use crate::rng::RngStream;

/// Euclidean nearest neighbours of `points[target]` among `points`, excluding the
/// target itself. Ties are broken by the lower index.
pub fn nearest_neighbors(points: &[Vec<f64>], target: usize, k: usize) -> Vec<usize> {
    let x = &points[target];
    let mut dists: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(i, p)| (squared_distance(x, p), i))
        .collect();
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    dists.into_iter().take(k).map(|(_, i)| i).collect()
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// `x + gamma * (neighbor - x)`
pub fn interpolate(x: &[f64], neighbor: &[f64], gamma: f64) -> Vec<f64> {
    x.iter().zip(neighbor).map(|(a, b)| a + gamma * (b - a)).collect()
}

/// SMOTE over a fixed set of minority points, with neighbour lists precomputed.
#[derive(Debug, Clone)]
pub struct SmoteSampler {
    points: Vec<Vec<f64>>,
    neighbors: Vec<Vec<usize>>,
}

impl SmoteSampler {
    pub fn new(points: Vec<Vec<f64>>, k: usize) -> Self {
        let neighbors = (0..points.len()).map(|i| nearest_neighbors(&points, i, k)).collect();
        Self { points, neighbors }
    }

    /// SMOTE needs at least two minority points.
    pub fn can_generate(&self) -> bool {
        self.points.len() >= 2
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn neighbors_of(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// One synthetic point interpolated from `points[seed]` toward a random neighbour.
    pub fn synthesize_from(&self, seed: usize, rng: &mut RngStream) -> Vec<f64> {
        let nn = &self.neighbors[seed];
        if nn.is_empty() {
            return self.points[seed].clone();
        }
        let neighbor = nn[rng.below(nn.len())];
        let gamma = rng.uniform();
        interpolate(&self.points[seed], &self.points[neighbor], gamma)
    }

    /// `count` synthetics seeded round-robin over the minority points.
    pub fn synthesize_cycling(&self, count: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
        if !self.can_generate() {
            return Vec::new();
        }
        (0..count).map(|i| self.synthesize_from(i % self.points.len(), rng)).collect()
    }

    /// `count` synthetics whose seeds are drawn uniformly from the minority points.
    pub fn synthesize_uniform(&self, count: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
        if !self.can_generate() {
            return Vec::new();
        }
        (0..count)
            .map(|_| {
                let seed = rng.below(self.points.len());
                self.synthesize_from(seed, rng)
            })
            .collect()
    }

    /// One synthetic per entry of `seeds`.
    pub fn synthesize_seeded(&self, seeds: &[usize], count: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
        if !self.can_generate() || seeds.is_empty() {
            return Vec::new();
        }
        (0..count)
            .map(|_| {
                let seed = seeds[rng.below(seeds.len())];
                self.synthesize_from(seed, rng)
            })
            .collect()
    }
}

/// Batch SMOTE: `per_point` synthetics for every positive, `T * N+` in total.
/// Fewer than two positives yield no synthetics.
pub fn smote(positives: &[Vec<f64>], per_point: usize, k: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    if positives.len() < 2 || k == 0 {
        return Vec::new();
    }
    let sampler = SmoteSampler::new(positives.to_vec(), k);
    let mut out = Vec::with_capacity(per_point * positives.len());
    for seed in 0..positives.len() {
        for _ in 0..per_point {
            out.push(sampler.synthesize_from(seed, rng));
        }
    }
    out
}
