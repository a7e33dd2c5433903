//! AdaBoost and its cost-sensitive relatives, all implemented by resampling.
//!
//! The weight updates are written without a normalization factor: for every scheme
//! the correctly and wrongly classified halves are rescaled so that the total weight
//! stays at one. AdaC2 and CSB2 use the normalization-free forms
//!
//! ```text
//! AdaC2  correct: C_n / (2 wacc)              wrong: C_n / (2 werr)
//! CSB2   correct: eps / ((1-eps)(eps+werr))   wrong: C_n / (eps + werr)
//! ```
//!
//! RUSBoost and SMOTEBoost only change the training set handed to each learner; the
//! error and the update are computed on the original distribution exactly as in
//! AdaBoost.

use crate::cost::CostSpec;
use crate::data::{Dataset, Label};
use crate::ensemble::{clamp_unit, Ensemble, EnsembleConfig, MemberDiagnostics, Variant, VoteRule};
use crate::error::{Error, Result};
use crate::learners::BaseLearner;
use crate::rng::{tag, RngStream};

use super::bagging::positive_sampler;
use super::sampling::{replica_size, round_half_up, sample_weighted, subsample_preserving_order, TrainingSet};
use super::smote::SmoteSampler;

/// Instance weights `D_m(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn from_vec(weights: Vec<f64>) -> Self {
        Self(weights)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Which weight update and vote weight a boosting run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoostScheme {
    AdaBoost,
    AdaC2,
    Csb2,
}

/// Outcome of one reweighting step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostStep {
    pub vote_weight: f64,
    pub diagnostics: MemberDiagnostics,
}

/// Applies one normalization-free update to `weights` in place.
///
/// When every instance falls on the same side (all correct or all wrong) the
/// two-halves split is undefined; the surviving side is then rescaled to carry the
/// full unit mass, which is the limit of the normalized update.
pub fn boosting_update(
    scheme: BoostScheme,
    weights: &mut WeightVector,
    labels: &[Label],
    correct: &[bool],
    cost: &CostSpec,
) -> BoostStep {
    let cost_of = |label: Label| match scheme {
        BoostScheme::AdaBoost => 1.0,
        _ => cost.cost_of(label),
    };
    let (mut acc, mut err, mut wacc, mut werr) = (0.0, 0.0, 0.0, 0.0);
    let (mut n_correct, mut n_wrong) = (0usize, 0usize);
    for ((&d, &label), &ok) in weights.0.iter().zip(labels).zip(correct) {
        let c = cost_of(label);
        if ok {
            acc += d;
            wacc += c * d;
            n_correct += 1;
        } else {
            err += d;
            werr += c * d;
            n_wrong += 1;
        }
    }
    let both = n_correct > 0 && n_wrong > 0;
    let halves = if both { 2.0 } else { 1.0 };

    let factor = |ok: bool, c: f64| -> f64 {
        match (scheme, ok) {
            (BoostScheme::AdaBoost, true) => 1.0 / (halves * acc),
            (BoostScheme::AdaBoost, false) => 1.0 / (halves * err),
            (BoostScheme::AdaC2, true) => c / (halves * wacc),
            (BoostScheme::AdaC2, false) => c / (halves * werr),
            // eps / ((1-eps)(eps+werr)) = 1/(2(1-eps)) * 2 eps/(eps+werr); the split
            // form is exactly AdaBoost's factor when werr == eps.
            (BoostScheme::Csb2, true) if both => 1.0 / (2.0 * acc) * (2.0 * err / (err + werr)),
            (BoostScheme::Csb2, true) => 1.0 / acc,
            (BoostScheme::Csb2, false) if both => c / (err + werr),
            (BoostScheme::Csb2, false) => c / werr,
        }
    };
    let f_pos = (factor(true, cost_of(Label::Positive)), factor(false, cost_of(Label::Positive)));
    let f_neg = (factor(true, cost_of(Label::Negative)), factor(false, cost_of(Label::Negative)));
    for ((d, &label), &ok) in weights.0.iter_mut().zip(labels).zip(correct) {
        let (fc, fw) = if label.is_positive() { f_pos } else { f_neg };
        *d *= if ok { fc } else { fw };
    }

    let (acc_c, err_c) = (clamp_unit(acc), clamp_unit(err));
    let (wacc_c, werr_c) = (clamp_unit(wacc), clamp_unit(werr));
    let (vote_weight, violated) = match scheme {
        BoostScheme::AdaBoost => ((acc_c / err_c).ln(), err >= 0.5),
        BoostScheme::AdaC2 => (0.5 * (wacc_c / werr_c).ln(), wacc <= werr),
        BoostScheme::Csb2 => (0.5 * (acc_c / err_c).ln(), err * err / acc_c >= werr),
    };
    BoostStep {
        vote_weight,
        diagnostics: MemberDiagnostics { epsilon: err, wacc, werr, weight_sum: weights.sum(), violated },
    }
}

/// How each round's training set is derived from the current distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Modifier {
    Plain,
    Rus(Variant),
    Smote(Variant),
}

struct BoostContext<'a> {
    data: &'a Dataset,
    cfg: &'a EnsembleConfig,
    positives: Vec<usize>,
    negatives: Vec<usize>,
    /// Dataset index -> rank among positives (for SMOTE seeds).
    positive_rank: Vec<Option<usize>>,
    sampler: Option<SmoteSampler>,
}

impl<'a> BoostContext<'a> {
    fn new(data: &'a Dataset, cfg: &'a EnsembleConfig, with_smote: bool) -> Self {
        let positives = data.indices_of(Label::Positive);
        let negatives = data.indices_of(Label::Negative);
        let mut positive_rank = vec![None; data.len()];
        for (rank, &i) in positives.iter().enumerate() {
            positive_rank[i] = Some(rank);
        }
        let sampler = with_smote.then(|| positive_sampler(data, cfg.k_smote));
        Self { data, cfg, positives, negatives, positive_rank, sampler }
    }

    fn seeds_of(&self, drawn: &[usize]) -> Vec<usize> {
        drawn.iter().filter_map(|&i| self.positive_rank[i]).collect()
    }

    fn training_set(&self, modifier: Modifier, weights: &WeightVector, m: usize, rng: &RngStream) -> TrainingSet {
        let d = weights.as_slice();
        let n = self.data.len();
        let (n_pos, n_neg) = (self.positives.len(), self.negatives.len());
        let c = self.cfg.cost.c_rate;
        let mut resample = rng.child2(tag::RESAMPLE, m as u64);
        let all: Vec<usize> = (0..n).collect();
        match modifier {
            Modifier::Plain => TrainingSet::from_indices(sample_weighted(&all, d, n, &mut resample)),
            Modifier::Rus(Variant::FixClassRatio) => {
                let keep = replica_size(c * n_pos as f64).min(n_neg);
                let mut under = rng.child2(tag::UNDERSAMPLE, m as u64);
                let kept = subsample_preserving_order(&self.negatives, keep, &mut under);
                let mut pool = self.positives.clone();
                pool.extend(kept);
                pool.sort_unstable();
                TrainingSet::from_indices(sample_weighted(&pool, d, pool.len(), &mut resample))
            }
            Modifier::Rus(Variant::FixExampleDistribution) => {
                let mut idx = sample_weighted(&self.positives, d, n_pos, &mut resample);
                idx.extend(sample_weighted(&self.negatives, d, replica_size(c * n_pos as f64), &mut resample));
                TrainingSet::from_indices(idx)
            }
            Modifier::Rus(Variant::FixSamplingRate) => {
                let drawn = sample_weighted(&all, d, n, &mut resample);
                let neg_positions: Vec<usize> =
                    (0..drawn.len()).filter(|&p| !self.data.get(drawn[p]).label.is_positive()).collect();
                if neg_positions.is_empty() {
                    return TrainingSet::from_indices(drawn);
                }
                let keep = replica_size(neg_positions.len() as f64 / c);
                let mut under = rng.child2(tag::UNDERSAMPLE, m as u64);
                let kept = subsample_preserving_order(&neg_positions, keep, &mut under);
                let mut keep_mask = vec![true; drawn.len()];
                for &p in &neg_positions {
                    keep_mask[p] = false;
                }
                for &p in &kept {
                    keep_mask[p] = true;
                }
                let idx = drawn.into_iter().zip(keep_mask).filter(|(_, k)| *k).map(|(i, _)| i).collect();
                TrainingSet::from_indices(idx)
            }
            Modifier::Smote(variant) => self.smote_training_set(variant, d, m, rng, &mut resample),
        }
    }

    fn smote_training_set(
        &self,
        variant: Variant,
        d: &[f64],
        m: usize,
        rng: &RngStream,
        resample: &mut RngStream,
    ) -> TrainingSet {
        let sampler = self.sampler.as_ref().expect("SMOTE sampler present for SMOTEBoost");
        let usable = sampler.can_generate();
        let n = self.data.len();
        let (n_pos, n_neg) = (self.positives.len() as f64, self.negatives.len() as f64);
        let c = self.cfg.cost.c_rate;
        let mut smote = rng.child2(tag::SMOTE, m as u64);
        match variant {
            Variant::FixClassRatio => {
                let s = if usable { round_half_up(n_neg / c - n_pos) } else { 0 };
                let synthetic = sampler.synthesize_uniform(s, &mut smote);
                let n_prime = n + s;
                let mut combined = d.to_vec();
                combined.extend(std::iter::repeat_n(1.0 / n_prime as f64, s));
                let pool: Vec<usize> = (0..n_prime).collect();
                let drawn = sample_weighted(&pool, &combined, n_prime, resample);
                let mut set = TrainingSet::default();
                for i in drawn {
                    if i < n {
                        set.indices.push(i);
                    } else {
                        set.synthetic.push(synthetic[i - n].clone());
                    }
                }
                set
            }
            Variant::FixExampleDistribution => {
                let mut idx = sample_weighted(&self.positives, d, self.positives.len(), resample);
                let seeds = self.seeds_of(&idx);
                idx.extend(sample_weighted(&self.negatives, d, self.negatives.len(), resample));
                let s = if usable { round_half_up(n_neg / c - n_pos) } else { 0 };
                TrainingSet { indices: idx, synthetic: sampler.synthesize_seeded(&seeds, s, &mut smote) }
            }
            Variant::FixSamplingRate => {
                let all: Vec<usize> = (0..n).collect();
                let idx = sample_weighted(&all, d, n, resample);
                let seeds = self.seeds_of(&idx);
                let s = if usable { round_half_up((c - 1.0) * seeds.len() as f64) } else { 0 };
                TrainingSet { indices: idx, synthetic: sampler.synthesize_seeded(&seeds, s, &mut smote) }
            }
        }
    }
}

fn boost_train(
    data: &Dataset,
    cfg: &EnsembleConfig,
    rng: &RngStream,
    scheme: BoostScheme,
    modifier: Modifier,
) -> Result<Ensemble> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::arg("cannot train on an empty dataset"));
    }
    if !matches!(modifier, Modifier::Plain) && data.counts().n_pos == 0 {
        return Err(Error::arg("resampling-based boosting needs at least one positive instance"));
    }
    let ctx = BoostContext::new(data, cfg, matches!(modifier, Modifier::Smote(_)));
    let labels = data.labels();
    let mut weights = WeightVector::uniform(data.len());
    let mut members = Vec::with_capacity(cfg.members);
    let mut vote_weights = Vec::with_capacity(cfg.members);
    let mut diagnostics = Vec::with_capacity(cfg.members);
    for m in 1..=cfg.members {
        let set = ctx.training_set(modifier, &weights, m, rng);
        let learner = set.fit(data, BaseLearner::new(cfg.learner, data.dim()))?;
        let correct: Vec<bool> = data.instances().iter().map(|i| learner.predict(&i.features) == i.label).collect();
        let step = boosting_update(scheme, &mut weights, &labels, &correct, &cfg.cost);
        members.push(learner);
        vote_weights.push(step.vote_weight);
        diagnostics.push(step.diagnostics);
    }
    let rule = match scheme {
        BoostScheme::AdaC2 => VoteRule::CostOdds,
        _ => VoteRule::ErrorOdds,
    };
    Ok(Ensemble { members, weights: vote_weights, rule, diagnostics })
}

/// AdaBoost by resampling; never stops early.
pub fn adaboost_train(data: &Dataset, cfg: &EnsembleConfig, rng: &RngStream) -> Result<Ensemble> {
    boost_train(data, cfg, rng, BoostScheme::AdaBoost, Modifier::Plain)
}

/// AdaC2: cost-weighted update, member weight `1/2 log(wacc/werr)`.
pub fn adac2_train(data: &Dataset, cfg: &EnsembleConfig, rng: &RngStream) -> Result<Ensemble> {
    boost_train(data, cfg, rng, BoostScheme::AdaC2, Modifier::Plain)
}

/// CSB2: AdaBoost-style treatment of correct instances, AdaC2-style for mistakes.
pub fn csb2_train(data: &Dataset, cfg: &EnsembleConfig, rng: &RngStream) -> Result<Ensemble> {
    boost_train(data, cfg, rng, BoostScheme::Csb2, Modifier::Plain)
}

/// RUSBoost: random undersampling of the negatives before each round.
pub fn rusboost_train(data: &Dataset, cfg: &EnsembleConfig, variant: Variant, rng: &RngStream) -> Result<Ensemble> {
    boost_train(data, cfg, rng, BoostScheme::AdaBoost, Modifier::Rus(variant))
}

/// SMOTEBoost: synthetic positives added before each round.
pub fn smoteboost_train(data: &Dataset, cfg: &EnsembleConfig, variant: Variant, rng: &RngStream) -> Result<Ensemble> {
    boost_train(data, cfg, rng, BoostScheme::AdaBoost, Modifier::Smote(variant))
}

/// The training multiset RUSBoost/SMOTEBoost would build for member `m` from `weights`.
pub fn modified_training_set(
    data: &Dataset,
    cfg: &EnsembleConfig,
    smote: bool,
    variant: Variant,
    weights: &WeightVector,
    m: usize,
    rng: &RngStream,
) -> TrainingSet {
    let ctx = BoostContext::new(data, cfg, smote);
    let modifier = if smote { Modifier::Smote(variant) } else { Modifier::Rus(variant) };
    ctx.training_set(modifier, weights, m, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabeledInstance;

    fn labels(bits: &[u8]) -> Vec<Label> {
        bits.iter().map(|&b| Label::from_bit(b).unwrap()).collect()
    }

    #[test]
    fn adaboost_one_mistake_in_four() {
        let mut w = WeightVector::uniform(4);
        let step = boosting_update(
            BoostScheme::AdaBoost,
            &mut w,
            &labels(&[1, 0, 0, 0]),
            &[true, true, true, false],
            &CostSpec::default(),
        );
        let d = w.as_slice();
        for &v in &d[..3] {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!((d[3] - 0.5).abs() < 1e-15);
        assert!((w.sum() - 1.0).abs() < 1e-15);
        assert!((step.vote_weight - 3f64.ln()).abs() < 1e-12);
        assert_eq!(step.diagnostics.epsilon, 0.25);
    }

    #[test]
    fn adaboost_all_correct_keeps_uniform() {
        let mut w = WeightVector::uniform(5);
        let step = boosting_update(
            BoostScheme::AdaBoost,
            &mut w,
            &labels(&[1, 0, 0, 0, 1]),
            &[true; 5],
            &CostSpec::default(),
        );
        assert!(w.as_slice().iter().all(|&v| (v - 0.2).abs() < 1e-15));
        assert!((step.vote_weight - ((1.0 - 1e-10) / 1e-10f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn adac2_two_instance_example() {
        let cost = CostSpec::costs(1.0, 0.5).unwrap();
        let mut w = WeightVector::from_vec(vec![0.5, 0.5]);
        let step = boosting_update(BoostScheme::AdaC2, &mut w, &labels(&[1, 0]), &[true, false], &cost);
        assert_eq!(step.diagnostics.wacc, 0.5);
        assert_eq!(step.diagnostics.werr, 0.25);
        assert_eq!(w.as_slice(), &[0.5, 0.5]);
        assert!((step.vote_weight - 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn csb2_one_negative_mistake() {
        let cost = CostSpec::costs(1.0, 0.5).unwrap();
        let mut w = WeightVector::uniform(4);
        let step =
            boosting_update(BoostScheme::Csb2, &mut w, &labels(&[1, 0, 0, 0]), &[true, true, true, false], &cost);
        assert_eq!(step.diagnostics.epsilon, 0.25);
        assert_eq!(step.diagnostics.werr, 0.125);
        for &v in &w.as_slice()[..3] {
            assert!((v - 0.25 * 8.0 / 9.0).abs() < 1e-15);
        }
        assert!((w.as_slice()[3] - 0.25 * 4.0 / 3.0).abs() < 1e-15);
        assert!((w.sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_costs_reduce_to_adaboost_bitwise() {
        let mut rng = RngStream::new(99, 0);
        for _ in 0..200 {
            let n = 2 + rng.below(30);
            let raw: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.01).collect();
            let total: f64 = raw.iter().sum();
            let base = WeightVector::from_vec(raw.iter().map(|v| v / total).collect());
            let lab: Vec<Label> = (0..n).map(|_| Label::from_bit((rng.uniform() < 0.3) as u8).unwrap()).collect();
            let ok: Vec<bool> = (0..n).map(|_| rng.uniform() < 0.7).collect();
            let unit = CostSpec::default();
            let mut a = base.clone();
            let sa = boosting_update(BoostScheme::AdaBoost, &mut a, &lab, &ok, &unit);
            for scheme in [BoostScheme::AdaC2, BoostScheme::Csb2] {
                let mut b = base.clone();
                let sb = boosting_update(scheme, &mut b, &lab, &ok, &unit);
                assert_eq!(a, b, "{scheme:?}");
                assert_eq!(2.0 * sb.vote_weight, sa.vote_weight, "{scheme:?}");
            }
        }
    }

    fn toy(n_pos: usize, n_neg: usize) -> Dataset {
        let mut rng = RngStream::new(7, 7);
        let mut inst = Vec::new();
        for i in 0..n_pos + n_neg {
            let label = if i < n_pos { Label::Positive } else { Label::Negative };
            let shift = if label.is_positive() { 1.0 } else { 0.0 };
            inst.push(LabeledInstance::new(vec![rng.uniform() + shift, rng.uniform()], label).unwrap());
        }
        Dataset::new(inst).unwrap()
    }

    #[test]
    fn rus1_keeps_c_times_positives() {
        let ds = toy(10, 60);
        let cfg = EnsembleConfig { cost: CostSpec::rate(2.0).unwrap(), ..Default::default() };
        let w = WeightVector::uniform(ds.len());
        let set = modified_training_set(&ds, &cfg, false, Variant::FixClassRatio, &w, 1, &RngStream::new(1, 0));
        let distinct_neg: std::collections::BTreeSet<_> =
            set.indices.iter().filter(|&&i| !ds.get(i).label.is_positive()).collect();
        assert!(distinct_neg.len() <= 20);
        assert_eq!(set.len(), 30);
    }

    #[test]
    fn rus2_fixes_class_counts() {
        let ds = toy(10, 60);
        let cfg = EnsembleConfig { cost: CostSpec::rate(3.0).unwrap(), ..Default::default() };
        let mut w = WeightVector::uniform(ds.len());
        w.0[0] = 0.5;
        let total = w.sum();
        w.0.iter_mut().for_each(|v| *v /= total);
        for m in 1..4 {
            let set =
                modified_training_set(&ds, &cfg, false, Variant::FixExampleDistribution, &w, m, &RngStream::new(2, 0));
            assert_eq!(set.class_sizes(&ds), (10, 30));
        }
    }

    #[test]
    fn smoteboost1_synthetic_count() {
        let ds = toy(10, 90);
        let cfg = EnsembleConfig { cost: CostSpec::rate(3.0).unwrap(), ..Default::default() };
        let w = WeightVector::uniform(ds.len());
        let set = modified_training_set(&ds, &cfg, true, Variant::FixClassRatio, &w, 1, &RngStream::new(3, 0));
        // N' = 100 + 20 draws from the combined distribution
        assert_eq!(set.len(), 120);
        let at_target = modified_training_set(
            &ds,
            &EnsembleConfig { cost: CostSpec::rate(9.0).unwrap(), ..Default::default() },
            true,
            Variant::FixClassRatio,
            &w,
            1,
            &RngStream::new(3, 0),
        );
        assert!(at_target.synthetic.is_empty());
    }

    #[test]
    fn weights_sum_to_one_every_round() {
        let ds = toy(15, 45);
        let cfg = EnsembleConfig { cost: CostSpec::new(1.0, 0.3, 2.5).unwrap(), ..Default::default() };
        let rng = RngStream::new(4, 0);
        let runs = [
            adaboost_train(&ds, &cfg, &rng).unwrap(),
            adac2_train(&ds, &cfg, &rng).unwrap(),
            csb2_train(&ds, &cfg, &rng).unwrap(),
            rusboost_train(&ds, &cfg, Variant::FixClassRatio, &rng).unwrap(),
            smoteboost_train(&ds, &cfg, Variant::FixSamplingRate, &rng).unwrap(),
        ];
        for ens in runs {
            assert_eq!(ens.diagnostics.len(), 10);
            for d in &ens.diagnostics {
                assert!((d.weight_sum - 1.0).abs() < 1e-12);
            }
            assert!(ens.weights.iter().all(|w| w.is_finite()));
        }
    }
}
