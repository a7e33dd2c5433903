//! Algorithm identifiers, training configuration and weighted voting shared by the
//! batch and online ensembles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost::{CostSpec, GridKind};
use crate::data::Label;
use crate::error::{Error, Result};
use crate::learners::{BaseLearner, LearnerKind};

/// Lower/upper clamp applied to error-like quantities before logs and divisions.
pub const CLAMP_EPS: f64 = 1e-10;

pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        return 0.5;
    }
    v.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
}

/// Which training-set modification a RUSBoost/SMOTEBoost run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Fix the weighted class ratio.
    FixClassRatio = 1,
    /// Fix the per-class example counts.
    FixExampleDistribution = 2,
    /// Fix the sampling rate.
    FixSamplingRate = 3,
}

impl Variant {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Variant::FixClassRatio),
            2 => Ok(Variant::FixExampleDistribution),
            3 => Ok(Variant::FixSamplingRate),
            _ => Err(Error::arg(format!("variant must be 1, 2 or 3 (got {n})"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    Bagging,
    Boosting,
    UnderOverBagging,
    SmoteBagging,
    AdaC2,
    Csb2,
    RusBoost(Variant),
    SmoteBoost(Variant),
}

impl Algorithm {
    pub const ALL: [Algorithm; 12] = [
        Algorithm::Bagging,
        Algorithm::Boosting,
        Algorithm::UnderOverBagging,
        Algorithm::SmoteBagging,
        Algorithm::AdaC2,
        Algorithm::Csb2,
        Algorithm::RusBoost(Variant::FixClassRatio),
        Algorithm::RusBoost(Variant::FixExampleDistribution),
        Algorithm::RusBoost(Variant::FixSamplingRate),
        Algorithm::SmoteBoost(Variant::FixClassRatio),
        Algorithm::SmoteBoost(Variant::FixExampleDistribution),
        Algorithm::SmoteBoost(Variant::FixSamplingRate),
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Bagging => "bag",
            Algorithm::Boosting => "boost",
            Algorithm::UnderOverBagging => "uob",
            Algorithm::SmoteBagging => "sbag",
            Algorithm::AdaC2 => "adac2",
            Algorithm::Csb2 => "csb2",
            Algorithm::RusBoost(Variant::FixClassRatio) => "rus1",
            Algorithm::RusBoost(Variant::FixExampleDistribution) => "rus2",
            Algorithm::RusBoost(Variant::FixSamplingRate) => "rus3",
            Algorithm::SmoteBoost(Variant::FixClassRatio) => "sbo1",
            Algorithm::SmoteBoost(Variant::FixExampleDistribution) => "sbo2",
            Algorithm::SmoteBoost(Variant::FixSamplingRate) => "sbo3",
        }
    }

    /// Which parameter a cost sweep varies for this algorithm, or `None` for the
    /// cost-insensitive baselines.
    pub fn grid_kind(self) -> Option<GridKind> {
        match self {
            Algorithm::Bagging | Algorithm::Boosting => None,
            Algorithm::AdaC2 | Algorithm::Csb2 => Some(GridKind::CostRatio),
            _ => Some(GridKind::SamplingRate),
        }
    }

    pub fn uses_smote(self) -> bool {
        matches!(self, Algorithm::SmoteBagging | Algorithm::SmoteBoost(_))
    }

    pub fn is_boosting(self) -> bool {
        !matches!(self, Algorithm::Bagging | Algorithm::UnderOverBagging | Algorithm::SmoteBagging)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

/// Parameters shared by every ensemble trainer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Number of base learners `M`.
    pub members: usize,
    pub learner: LearnerKind,
    pub cost: CostSpec,
    /// SMOTE neighbour count `k`.
    pub k_smote: usize,
    /// Forgetting factor for online learners and accumulators; 1 means stationary.
    pub beta: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            members: 10,
            learner: LearnerKind::NaiveBayes,
            cost: CostSpec::default(),
            k_smote: 5,
            beta: 1.0,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.members == 0 {
            return Err(Error::arg("an ensemble needs at least one member"));
        }
        if self.k_smote == 0 {
            return Err(Error::arg("SMOTE needs k >= 1"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::arg(format!("forgetting factor must lie in (0, 1] (got {})", self.beta)));
        }
        self.cost.validate()
    }

    /// Resampling fraction `a_m = m / M` for the 1-based member index `m`.
    pub fn rate_fraction(&self, m: usize) -> f64 {
        m as f64 / self.members as f64
    }
}

/// How member votes are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VoteRule {
    Majority,
    /// `log((1 - eps) / eps)`
    ErrorOdds,
    /// `log(wacc / werr)`
    CostOdds,
}

/// Per-member training diagnostics of a batch boosting run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberDiagnostics {
    /// Unweighted error `eps_m` on the original distribution.
    pub epsilon: f64,
    pub wacc: f64,
    pub werr: f64,
    /// `sum_n D_{m+1}(n)` after the update.
    pub weight_sum: f64,
    /// Whether the member broke the boosting requirement for its algorithm.
    pub violated: bool,
}

/// A trained, immutable ensemble.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub members: Vec<BaseLearner>,
    pub weights: Vec<f64>,
    pub rule: VoteRule,
    pub diagnostics: Vec<MemberDiagnostics>,
}

impl Ensemble {
    pub fn majority(members: Vec<BaseLearner>) -> Self {
        let weights = vec![1.0; members.len()];
        Self { members, weights, rule: VoteRule::Majority, diagnostics: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn violations(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.violated).count()
    }

    pub fn score(&self, features: &[f64]) -> f64 {
        combine_votes(self.members.iter().zip(&self.weights).map(|(m, &w)| (m.predict(features), w)))
    }

    pub fn predict(&self, features: &[f64]) -> Label {
        label_from_score(self.score(features))
    }
}

/// Relative tolerance under which positive and negative vote mass count as tied.
const VOTE_TIE_TOL: f64 = 1e-12;

/// Weight-normalized positive vote mass in `[0, 1]`.
///
/// With nonnegative weights this is `sum(w | vote = +) / sum(w)`. Negative weights
/// (members worse than chance) are allowed: the score is then
/// `0.5 + (P - N) / (2 sum|w|)`, which keeps the argmax-of-vote-mass decision.
/// Round-off ties resolve to exactly 0.5.
pub fn combine_votes(votes: impl Iterator<Item = (Label, f64)>) -> f64 {
    let (mut pos, mut neg, mut abs, mut any_negative) = (0.0, 0.0, 0.0, false);
    for (label, w) in votes {
        match label {
            Label::Positive => pos += w,
            Label::Negative => neg += w,
        }
        abs += w.abs();
        any_negative |= w < 0.0;
    }
    if abs == 0.0 || (pos - neg).abs() <= VOTE_TIE_TOL * abs {
        return 0.5;
    }
    if any_negative {
        (0.5 + (pos - neg) / (2.0 * abs)).clamp(0.0, 1.0)
    } else {
        pos / (pos + neg)
    }
}

/// Positive iff `score > 0.5`.
pub fn label_from_score(score: f64) -> Label {
    if score > 0.5 {
        Label::Positive
    } else {
        Label::Negative
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn votes(labels: &[u8], weights: &[f64]) -> f64 {
        combine_votes(labels.iter().zip(weights).map(|(&l, &w)| (Label::from_bit(l).unwrap(), w)))
    }

    #[test]
    fn unit_weight_majority() {
        let s = votes(&[1, 1, 1, 1, 1, 1, 1, 0, 0, 0], &[1.0; 10]);
        assert_eq!(s, 0.7);
        assert_eq!(label_from_score(s), Label::Positive);
    }

    #[test]
    fn single_weighted_member_decides() {
        assert_eq!(votes(&[1, 0, 0], &[1.0, 0.0, 0.0]), 1.0);
        assert_eq!(votes(&[0, 1, 1], &[1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn log_weight_tie_is_negative() {
        let w = [3f64.ln(), 3f64.ln(), 9f64.ln()];
        let s = votes(&[1, 1, 0], &w);
        assert_eq!(s, 0.5);
        assert_eq!(label_from_score(s), Label::Negative);
    }

    #[test]
    fn negative_weights_stay_in_range() {
        let s = votes(&[1, 0], &[-2.0, 1.0]);
        assert!((0.0..=1.0).contains(&s));
        assert_eq!(label_from_score(s), Label::Negative);
        assert_eq!(votes(&[1, 1], &[0.0, 0.0]), 0.5);
    }

    #[test]
    fn algorithm_ids_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.id().parse::<Algorithm>().unwrap(), a);
        }
        assert!("ada".parse::<Algorithm>().is_err());
    }
}
