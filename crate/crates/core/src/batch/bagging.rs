//! Bagging, UnderOverBagging and SMOTEBagging.

use crate::data::{ClassCounts, Dataset, Label};
use crate::ensemble::{Ensemble, EnsembleConfig};
use crate::error::{Error, Result};
use crate::learners::BaseLearner;
use crate::rng::{tag, RngStream};

use super::sampling::{replica_size, sample_uniform, TrainingSet};
use super::smote::SmoteSampler;

/// The per-member resampling fractions `a_m = m / M`, `m = 1..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampleRateSchedule {
    fractions: Vec<f64>,
}

impl ResampleRateSchedule {
    pub fn new(members: usize) -> Self {
        let fractions = (1..=members).map(|m| m as f64 / members as f64).collect();
        Self { fractions }
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }
}

/// `(negatives, positives)` drawn for an UnderOverBagging member with fraction `a`.
pub fn uob_replica_sizes(counts: ClassCounts, c_rate: f64, a: f64) -> (usize, usize) {
    (
        replica_size(counts.n_neg as f64 * a),
        replica_size(c_rate * counts.n_pos as f64 * a),
    )
}

/// `(resampled, synthetic)` positives for a SMOTEBagging member; they always add up
/// to `round(C * N+)`.
pub fn smotebagging_positive_split(n_pos: usize, c_rate: f64, a: f64) -> (usize, usize) {
    let budget = replica_size(c_rate * n_pos as f64);
    let resampled = replica_size(c_rate * n_pos as f64 * a).min(budget);
    (resampled, budget - resampled)
}

fn check_nonempty(data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::arg("cannot train on an empty dataset"));
    }
    Ok(())
}

/// Standard bagging: `M` bootstrap replicas of size `N`, majority vote.
pub fn bagging_train(data: &Dataset, cfg: &EnsembleConfig, rng: &RngStream) -> Result<Ensemble> {
    cfg.validate()?;
    check_nonempty(data)?;
    let all: Vec<usize> = (0..data.len()).collect();
    let members = (1..=cfg.members)
        .map(|m| {
            let mut r = rng.child2(tag::RESAMPLE, m as u64);
            let set = TrainingSet::from_indices(sample_uniform(&all, data.len(), &mut r));
            set.fit(data, BaseLearner::new(cfg.learner, data.dim()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble::majority(members))
}

/// Training multiset of UnderOverBagging member `m` (1-based).
pub fn uob_training_set(data: &Dataset, cfg: &EnsembleConfig, m: usize, rng: &RngStream) -> TrainingSet {
    let a = cfg.rate_fraction(m);
    let (n_neg, n_pos) = uob_replica_sizes(data.counts(), cfg.cost.c_rate, a);
    let mut r = rng.child2(tag::RESAMPLE, m as u64);
    let mut indices = sample_uniform(&data.indices_of(Label::Negative), n_neg, &mut r);
    indices.extend(sample_uniform(&data.indices_of(Label::Positive), n_pos, &mut r));
    TrainingSet::from_indices(indices)
}

/// UnderOverBagging: member `m` sees `N- a_m` negatives and `C N+ a_m` positives.
pub fn underoverbagging_train(data: &Dataset, cfg: &EnsembleConfig, rng: &RngStream) -> Result<Ensemble> {
    cfg.validate()?;
    check_nonempty(data)?;
    if data.counts().n_pos == 0 {
        return Err(Error::arg("UnderOverBagging needs at least one positive instance"));
    }
    let members = (1..=cfg.members)
        .map(|m| uob_training_set(data, cfg, m, rng).fit(data, BaseLearner::new(cfg.learner, data.dim())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble::majority(members))
}

/// Training multiset of SMOTEBagging member `m` (1-based).
pub fn smotebagging_training_set(
    data: &Dataset,
    cfg: &EnsembleConfig,
    sampler: &SmoteSampler,
    m: usize,
    rng: &RngStream,
) -> TrainingSet {
    let a = cfg.rate_fraction(m);
    let counts = data.counts();
    let (mut resampled, mut synthetic) = smotebagging_positive_split(counts.n_pos, cfg.cost.c_rate, a);
    if !sampler.can_generate() {
        resampled += synthetic;
        synthetic = 0;
    }
    let mut r = rng.child2(tag::RESAMPLE, m as u64);
    let mut indices = sample_uniform(&data.indices_of(Label::Negative), counts.n_neg, &mut r);
    indices.extend(sample_uniform(&data.indices_of(Label::Positive), resampled, &mut r));
    let mut s = rng.child2(tag::SMOTE, m as u64);
    TrainingSet { indices, synthetic: sampler.synthesize_cycling(synthetic, &mut s) }
}

/// SMOTEBagging: `N-` resampled negatives, and `C N+` positives of which a fraction
/// `a_m` is resampled and the rest synthesized by SMOTE.
pub fn smotebagging_train(data: &Dataset, cfg: &EnsembleConfig, rng: &RngStream) -> Result<Ensemble> {
    cfg.validate()?;
    check_nonempty(data)?;
    if data.counts().n_pos == 0 {
        return Err(Error::arg("SMOTEBagging needs at least one positive instance"));
    }
    let sampler = positive_sampler(data, cfg.k_smote);
    let members = (1..=cfg.members)
        .map(|m| {
            smotebagging_training_set(data, cfg, &sampler, m, rng)
                .fit(data, BaseLearner::new(cfg.learner, data.dim()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble::majority(members))
}

/// SMOTE sampler over the dataset's positives, in dataset order.
pub(crate) fn positive_sampler(data: &Dataset, k: usize) -> SmoteSampler {
    let points = data
        .indices_of(Label::Positive)
        .into_iter()
        .map(|i| data.get(i).features.clone())
        .collect();
    SmoteSampler::new(points, k)
}
