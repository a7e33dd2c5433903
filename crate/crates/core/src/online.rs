//! Online counterparts of the batch ensembles.
//!
//! Every member sees each arriving instance `k ~ Poisson(lambda)` times. Bagging-type
//! ensembles use a fixed per-member rate; boosting-type ensembles pass `lambda` from
//! member to member and track running sums of it to estimate the error rates.

use serde::{Deserialize, Serialize};

use crate::batch::smote::{interpolate, nearest_neighbors};
use crate::cost::CostSpec;
use crate::data::{ClassCounts, Label, LabeledInstance};
use crate::ensemble::{clamp_unit, combine_votes, label_from_score, Algorithm, EnsembleConfig, Variant};
use crate::error::{Error, Result};
use crate::learners::BaseLearner;
use crate::rng::{tag, RngStream};

/// Per-member Poisson-parameter accumulators of an online boosting ensemble.
///
/// `wacc_mass`/`werr_mass` hold `TP + TN` and `FP + FN`, accumulated directly so that
/// unit costs reproduce `lambda_sc`/`lambda_sw` bit for bit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoostLearnerState {
    pub lambda_sc: f64,
    pub lambda_sw: f64,
    pub lambda_tp: f64,
    pub lambda_tn: f64,
    pub lambda_fp: f64,
    pub lambda_fn: f64,
    pub lambda_sum: f64,
    pub lambda_pos: f64,
    pub lambda_neg: f64,
    pub wacc_mass: f64,
    pub werr_mass: f64,
}

impl BoostLearnerState {
    fn ratio(&self, mass: f64) -> f64 {
        if self.lambda_sum > 0.0 {
            clamp_unit(mass / self.lambda_sum)
        } else {
            0.5
        }
    }

    /// `lambda_sw / lambda_sum`, clamped.
    pub fn epsilon(&self) -> f64 {
        self.ratio(self.lambda_sw)
    }

    /// `lambda_sc / lambda_sum`, clamped.
    pub fn accuracy(&self) -> f64 {
        self.ratio(self.lambda_sc)
    }

    pub fn wacc(&self) -> f64 {
        self.ratio(self.wacc_mass)
    }

    pub fn werr(&self) -> f64 {
        self.ratio(self.werr_mass)
    }

    /// Multiplies every accumulator by `beta`.
    pub fn decay(&mut self, beta: f64) {
        if beta == 1.0 {
            return;
        }
        for v in [
            &mut self.lambda_sc,
            &mut self.lambda_sw,
            &mut self.lambda_tp,
            &mut self.lambda_tn,
            &mut self.lambda_fp,
            &mut self.lambda_fn,
            &mut self.lambda_sum,
            &mut self.lambda_pos,
            &mut self.lambda_neg,
            &mut self.wacc_mass,
            &mut self.werr_mass,
        ] {
            *v *= beta;
        }
    }

    /// Records the member's verdict on an instance carrying weight `lambda` and
    /// returns the weight handed to the next member. `lambda_sum` must already
    /// include `lambda`.
    fn record(&mut self, scheme: Scheme, correct: bool, label: Label, lambda: f64, cost: &CostSpec) -> f64 {
        let c = match scheme {
            Scheme::AdaBoost => 1.0,
            _ => cost.cost_of(label),
        };
        let weighted = c * lambda;
        match (correct, label) {
            (true, Label::Positive) => self.lambda_tp += weighted,
            (true, Label::Negative) => self.lambda_tn += weighted,
            (false, Label::Positive) => self.lambda_fn += weighted,
            (false, Label::Negative) => self.lambda_fp += weighted,
        }
        if correct {
            self.lambda_sc += lambda;
            self.wacc_mass += weighted;
        } else {
            self.lambda_sw += lambda;
            self.werr_mass += weighted;
        }
        let (acc, err) = (self.accuracy(), self.epsilon());
        match (scheme, correct) {
            (Scheme::AdaBoost, true) => lambda / (2.0 * acc),
            (Scheme::AdaBoost, false) => lambda / (2.0 * err),
            (Scheme::AdaC2, true) => weighted / (2.0 * self.wacc()),
            (Scheme::AdaC2, false) => weighted / (2.0 * self.werr()),
            (Scheme::Csb2, true) => lambda / (2.0 * acc) * (2.0 * err / (err + self.werr())),
            (Scheme::Csb2, false) => weighted / (err + self.werr()),
        }
    }

    fn vote_weight(&self, scheme: Scheme) -> f64 {
        if self.lambda_sum <= 0.0 {
            return 0.0;
        }
        match scheme {
            Scheme::AdaC2 => (self.wacc() / self.werr()).ln(),
            _ => (self.accuracy() / self.epsilon()).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scheme {
    AdaBoost,
    AdaC2,
    Csb2,
}

/// All positives seen so far, in arrival order, plus the neighbour list of the newest.
#[derive(Debug, Clone, Default)]
pub struct PositiveBuffer {
    points: Vec<Vec<f64>>,
    k: usize,
    newest_neighbors: Vec<usize>,
}

impl PositiveBuffer {
    pub fn new(k: usize) -> Self {
        Self { points: Vec::new(), k, newest_neighbors: Vec::new() }
    }

    pub fn push(&mut self, features: Vec<f64>) {
        self.points.push(features);
        let last = self.points.len() - 1;
        self.newest_neighbors = nearest_neighbors(&self.points, last, self.k);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn newest(&self) -> Option<&[f64]> {
        self.points.last().map(Vec::as_slice)
    }

    /// Buffer indices of the newest point's `min(k, len - 1)` nearest neighbours.
    pub fn newest_neighbors(&self) -> &[usize] {
        &self.newest_neighbors
    }
}

/// One synthetic positive interpolated from the newest buffered positive toward a
/// random one of its nearest neighbours. A single-point buffer yields that point.
pub fn online_smote(buffer: &PositiveBuffer, rng: &mut RngStream) -> Result<Vec<f64>> {
    let x = buffer.newest().ok_or_else(|| Error::arg("online SMOTE needs at least one buffered positive"))?;
    let nn = buffer.newest_neighbors();
    if nn.is_empty() {
        return Ok(x.to_vec());
    }
    let neighbor = &buffer.points[nn[rng.below(nn.len())]];
    Ok(interpolate(x, neighbor, rng.uniform()))
}

#[derive(Debug, Clone)]
struct MemberStreams {
    present: RngStream,
    smote: RngStream,
}

/// An online ensemble of any of the supported algorithms.
#[derive(Debug, Clone)]
pub struct OnlineEnsemble {
    algorithm: Algorithm,
    cfg: EnsembleConfig,
    dim: usize,
    members: Vec<BaseLearner>,
    states: Vec<BoostLearnerState>,
    streams: Vec<MemberStreams>,
    counts: ClassCounts,
    buffer: PositiveBuffer,
    presentations: Vec<u64>,
    synthetic_presentations: Vec<u64>,
}

impl OnlineEnsemble {
    /// Member `m` (1-based) draws from the children `(PRESENT, m)` and `(SMOTE, m)`
    /// of `rng`, so ensembles built from the same stream share their draws.
    pub fn new(algorithm: Algorithm, cfg: EnsembleConfig, dim: usize, rng: &RngStream) -> Result<Self> {
        cfg.validate()?;
        if dim == 0 {
            return Err(Error::arg("feature dimensionality must be at least 1"));
        }
        let members = (0..cfg.members).map(|_| BaseLearner::with_forgetting(cfg.learner, dim, cfg.beta)).collect();
        let streams = (1..=cfg.members as u64)
            .map(|m| MemberStreams { present: rng.child2(tag::PRESENT, m), smote: rng.child2(tag::SMOTE, m) })
            .collect();
        Ok(Self {
            algorithm,
            cfg,
            dim,
            members,
            states: vec![BoostLearnerState::default(); cfg.members],
            streams,
            counts: ClassCounts::default(),
            buffer: PositiveBuffer::new(cfg.k_smote),
            presentations: vec![0; cfg.members],
            synthetic_presentations: vec![0; cfg.members],
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[BaseLearner] {
        &self.members
    }

    /// Boosting accumulators; all zero for bagging-type ensembles.
    pub fn states(&self) -> &[BoostLearnerState] {
        &self.states
    }

    pub fn counts(&self) -> ClassCounts {
        self.counts
    }

    pub fn buffer(&self) -> &PositiveBuffer {
        &self.buffer
    }

    /// Real-instance presentations per member so far.
    pub fn presentations(&self) -> &[u64] {
        &self.presentations
    }

    /// Synthetic presentations per member so far.
    pub fn synthetic_presentations(&self) -> &[u64] {
        &self.synthetic_presentations
    }

    /// Current member vote weights.
    pub fn vote_weights(&self) -> Vec<f64> {
        match self.scheme() {
            None => vec![1.0; self.members.len()],
            Some(s) => self.states.iter().map(|st| st.vote_weight(s)).collect(),
        }
    }

    /// Members currently breaking their algorithm's boosting requirement.
    pub fn violations(&self) -> usize {
        let Some(scheme) = self.scheme() else { return 0 };
        self.states
            .iter()
            .filter(|st| st.lambda_sum > 0.0)
            .filter(|st| match scheme {
                Scheme::AdaBoost => st.epsilon() >= 0.5,
                Scheme::AdaC2 => st.wacc() <= st.werr(),
                Scheme::Csb2 => st.epsilon() * st.epsilon() / st.accuracy() >= st.werr(),
            })
            .count()
    }

    pub fn score(&self, features: &[f64]) -> f64 {
        let weights = self.vote_weights();
        combine_votes(self.members.iter().zip(weights).map(|(m, w)| (m.predict(features), w)))
    }

    pub fn predict(&self, features: &[f64]) -> Label {
        label_from_score(self.score(features))
    }

    fn scheme(&self) -> Option<Scheme> {
        match self.algorithm {
            Algorithm::Bagging | Algorithm::UnderOverBagging | Algorithm::SmoteBagging => None,
            Algorithm::AdaC2 => Some(Scheme::AdaC2),
            Algorithm::Csb2 => Some(Scheme::Csb2),
            Algorithm::Boosting | Algorithm::RusBoost(_) | Algorithm::SmoteBoost(_) => Some(Scheme::AdaBoost),
        }
    }

    /// Learns from one instance.
    pub fn update(&mut self, instance: &LabeledInstance) -> Result<()> {
        if instance.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: instance.dim() });
        }
        self.counts.record(instance.label);
        if instance.label.is_positive() && self.algorithm.uses_smote() {
            self.buffer.push(instance.features.clone());
        }
        match self.scheme() {
            None => self.bagging_update(instance),
            Some(s) => self.boosting_update(instance, s),
        }
    }

    fn present(&mut self, m: usize, instance: &LabeledInstance, lambda: f64) -> Result<()> {
        let k = self.streams[m].present.poisson(lambda)?;
        self.members[m].present(&instance.features, instance.label, k)?;
        self.presentations[m] += k;
        Ok(())
    }

    fn present_synthetic(&mut self, m: usize, lambda: f64) -> Result<()> {
        if lambda <= 0.0 || self.buffer.is_empty() {
            return Ok(());
        }
        let stream = &mut self.streams[m].smote;
        let k = stream.poisson(lambda)?;
        for _ in 0..k {
            let s = online_smote(&self.buffer, stream)?;
            self.members[m].update_raw(&s, Label::Positive)?;
        }
        self.synthetic_presentations[m] += k;
        Ok(())
    }

    fn bagging_update(&mut self, instance: &LabeledInstance) -> Result<()> {
        let c = self.cfg.cost.c_rate;
        let positive = instance.label.is_positive();
        for m in 0..self.members.len() {
            let a = self.cfg.rate_fraction(m + 1);
            match self.algorithm {
                Algorithm::UnderOverBagging => self.present(m, instance, if positive { a * c } else { a })?,
                Algorithm::SmoteBagging if positive => {
                    self.present(m, instance, a * c)?;
                    self.present_synthetic(m, (1.0 - a) * c)?;
                }
                // batch SMOTEBagging keeps all N- negatives in every replica
                _ => self.present(m, instance, 1.0)?,
            }
        }
        Ok(())
    }

    fn boosting_update(&mut self, instance: &LabeledInstance, scheme: Scheme) -> Result<()> {
        let label = instance.label;
        let beta = self.cfg.beta;
        let cost = self.cfg.cost;
        let mut lambda = 1.0;
        for m in 0..self.members.len() {
            let st = &mut self.states[m];
            st.decay(beta);
            st.lambda_sum += lambda;
            match label {
                Label::Positive => st.lambda_pos += lambda,
                Label::Negative => st.lambda_neg += lambda,
            }
            let (lambda_present, lambda_smote) = modified_rates(self.algorithm, st, self.counts, &cost, label, lambda);
            self.present(m, instance, lambda_present)?;
            self.present_synthetic(m, lambda_smote)?;
            let correct = self.members[m].predict(&instance.features) == label;
            lambda = self.states[m].record(scheme, correct, label, lambda, &cost);
        }
        Ok(())
    }
}

/// `(lambda for the instance, lambda for online-SMOTE synthetics)` under the
/// RUSBoost/SMOTEBoost variant rules. Plain boosting returns `(lambda, 0)`, as does
/// any variant until both classes have been observed.
fn modified_rates(
    algorithm: Algorithm,
    st: &BoostLearnerState,
    counts: ClassCounts,
    cost: &CostSpec,
    label: Label,
    lambda: f64,
) -> (f64, f64) {
    let (n_pos, n_neg) = (counts.n_pos as f64, counts.n_neg as f64);
    if counts.n_pos == 0 || counts.n_neg == 0 {
        return (lambda, 0.0);
    }
    let n = n_pos + n_neg;
    let c = cost.c_rate;
    let positive = label.is_positive();
    let (p, q) = (st.lambda_pos, st.lambda_neg);
    let share = if positive { p / (p + q) } else { q / (p + q) };
    match algorithm {
        Algorithm::RusBoost(Variant::FixClassRatio) => {
            // keep a fraction r of the negatives, then renormalize and draw n+ + r n- items
            let r = (c * n_pos / n_neg).min(1.0);
            let base = lambda * (p + q) / (p + r * q) * (n_pos + r * n_neg) / n;
            (if positive { base } else { r * base }, 0.0)
        }
        Algorithm::RusBoost(Variant::FixExampleDistribution) => {
            let target = if positive { n_pos / n } else { c * n_pos / n };
            (if share > 0.0 { lambda * target / share } else { lambda }, 0.0)
        }
        Algorithm::RusBoost(Variant::FixSamplingRate) => (if positive { lambda } else { lambda / c }, 0.0),
        Algorithm::SmoteBoost(variant) => {
            let lambda_prime = match variant {
                Variant::FixExampleDistribution if share > 0.0 => lambda * (if positive { n_pos } else { n_neg } / n) / share,
                _ => lambda,
            };
            let lambda_smote = if !positive {
                0.0
            } else {
                match variant {
                    Variant::FixClassRatio => n_neg / (c * n_pos) - 1.0,
                    Variant::FixExampleDistribution => lambda_prime * (n_neg / (c * n_pos) - 1.0),
                    Variant::FixSamplingRate => (c - 1.0) * lambda,
                }
            };
            (lambda_prime, lambda_smote.max(0.0))
        }
        _ => (lambda, 0.0),
    }
}
