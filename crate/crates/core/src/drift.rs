//! Forgetting factors and synthetic SINE1-family drift streams.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Label, LabeledInstance};
use crate::error::{Error, Result};
use crate::online::BoostLearnerState;
use crate::rng::{tag, RngStream};

/// Default length of the SINE1G transition window.
pub const DEFAULT_TRANSITION: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriftKind {
    /// One abrupt reversal at the midpoint.
    Sine1,
    /// Gradual reversal over a window centred on the midpoint.
    Sine1G,
    /// Gradual reversal over each half, with a return to the old concept at the midpoint.
    Sine1M,
}

impl DriftKind {
    pub fn id(self) -> &'static str {
        match self {
            DriftKind::Sine1 => "sine1",
            DriftKind::Sine1G => "sine1g",
            DriftKind::Sine1M => "sine1m",
        }
    }
}

impl fmt::Display for DriftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for DriftKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sine1" => Ok(DriftKind::Sine1),
            "sine1g" => Ok(DriftKind::Sine1G),
            "sine1m" => Ok(DriftKind::Sine1M),
            _ => Err(Error::Config(format!("unknown drift kind '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftStreamSpec {
    pub kind: DriftKind,
    pub length: usize,
    /// Target `n- / n+`.
    pub class_ratio: f64,
    /// SINE1G window length.
    pub transition: usize,
    pub seed: u64,
}

impl DriftStreamSpec {
    pub fn new(kind: DriftKind, length: usize, class_ratio: f64, seed: u64) -> Self {
        Self { kind, length, class_ratio, transition: DEFAULT_TRANSITION.min(length), seed }
    }

    /// Number of positives placed in the stream: `round(N / (1 + ratio))`.
    pub fn positives(&self) -> usize {
        (self.length as f64 / (1.0 + self.class_ratio)).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Generation("stream length must be positive".into()));
        }
        if !self.class_ratio.is_finite() || self.class_ratio < 1.0 {
            return Err(Error::Generation(format!(
                "class ratio must be finite and at least 1 (got {})",
                self.class_ratio
            )));
        }
        if self.kind == DriftKind::Sine1G && self.transition > self.length {
            return Err(Error::Generation(format!(
                "transition window {} longer than the stream ({})",
                self.transition, self.length
            )));
        }
        let n_pos = self.positives();
        if n_pos == 0 || n_pos == self.length {
            return Err(Error::Generation(format!(
                "a stream of {} instances cannot realize class ratio {}",
                self.length, self.class_ratio
            )));
        }
        Ok(())
    }
}

/// Forgetting factor `beta` in `(0, 1]`; 1 disables forgetting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForgettingConfig {
    pub beta: f64,
}

impl ForgettingConfig {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::arg(format!("forgetting factor must lie in (0, 1] (got {beta})")));
        }
        Ok(Self { beta })
    }
}

impl Default for ForgettingConfig {
    fn default() -> Self {
        Self { beta: 1.0 }
    }
}

/// Decays every accumulator of `state` by `cfg.beta`. Online ensembles apply this at
/// each member step before adding the new `lambda`.
pub fn apply_forgetting(mut state: BoostLearnerState, cfg: ForgettingConfig) -> BoostLearnerState {
    state.decay(cfg.beta);
    state
}

/// Probability that instance `index` (0-based) follows the old concept.
pub fn prob_old(spec: &DriftStreamSpec, index: usize) -> f64 {
    let half = spec.length / 2;
    match spec.kind {
        DriftKind::Sine1 => {
            if index < half {
                1.0
            } else {
                0.0
            }
        }
        DriftKind::Sine1G => {
            let w = spec.transition;
            let start = half.saturating_sub(w / 2);
            if index < start {
                1.0
            } else if index >= start + w {
                0.0
            } else {
                1.0 - (index - start) as f64 / w as f64
            }
        }
        DriftKind::Sine1M => {
            if half == 0 {
                return 1.0;
            }
            let offset = if index < half { index } else { index - half };
            (1.0 - offset as f64 / half as f64).max(0.0)
        }
    }
}

/// Label of `(x, y)` under the old (`y < sin x` is positive) or reversed concept.
pub fn sine_label(x: f64, y: f64, old: bool) -> Label {
    let below = y < x.sin();
    if below == old {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// Positions of the positives: a uniformly random subset of `[0, N)` of the exact size,
/// which is what label rejection sampling yields once conditioned on the count.
fn positive_positions(spec: &DriftStreamSpec, rng: &mut RngStream) -> Vec<bool> {
    let n = spec.length;
    let mut is_pos = vec![false; n];
    is_pos[..spec.positives()].fill(true);
    rng.shuffle(&mut is_pos);
    is_pos
}

fn generate_with(spec: &DriftStreamSpec, rng: &mut RngStream) -> Result<Vec<LabeledInstance>> {
    spec.validate()?;
    let mut place = rng.child(1);
    let mut concept = rng.child(2);
    let mut points = rng.child(3);
    let labels = positive_positions(spec, &mut place);
    labels
        .into_iter()
        .enumerate()
        .map(|(i, positive)| {
            let old = concept.uniform() < prob_old(spec, i);
            let want = if positive { Label::Positive } else { Label::Negative };
            loop {
                let (x, y) = (points.uniform(), points.uniform());
                if sine_label(x, y, old) == want {
                    return LabeledInstance::new(vec![x, y], want);
                }
            }
        })
        .collect()
}

fn expect_kind(spec: &DriftStreamSpec, kind: DriftKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::arg(format!("expected a {kind} spec, got {}", spec.kind)));
    }
    Ok(())
}

/// SINE1: abrupt reversal of the concept at `N / 2`.
pub fn gen_sine1(spec: &DriftStreamSpec, rng: &mut RngStream) -> Result<Vec<LabeledInstance>> {
    expect_kind(spec, DriftKind::Sine1)?;
    generate_with(spec, rng)
}

/// SINE1G: the old concept fades out linearly over the transition window.
pub fn gen_sine1g(spec: &DriftStreamSpec, rng: &mut RngStream) -> Result<Vec<LabeledInstance>> {
    expect_kind(spec, DriftKind::Sine1G)?;
    generate_with(spec, rng)
}

/// SINE1M: the SINE1G-style fade runs over each half of the stream.
pub fn gen_sine1m(spec: &DriftStreamSpec, rng: &mut RngStream) -> Result<Vec<LabeledInstance>> {
    expect_kind(spec, DriftKind::Sine1M)?;
    generate_with(spec, rng)
}

/// Generates the stream described by `spec` from its own seed.
pub fn generate(spec: &DriftStreamSpec) -> Result<Vec<LabeledInstance>> {
    let mut rng = RngStream::new(spec.seed, tag::DRIFT);
    generate_with(spec, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_flip() {
        assert_eq!(sine_label(0.5, 0.2, true), Label::Positive);
        assert_eq!(sine_label(0.5, 0.2, false), Label::Negative);
        let mut rng = RngStream::new(4, 0);
        for _ in 0..1000 {
            let (x, y) = (rng.uniform(), rng.uniform());
            assert_eq!(sine_label(x, y, true).flip(), sine_label(x, y, false));
        }
    }

    #[test]
    fn sine1_labels_follow_the_rule() {
        let spec = DriftStreamSpec::new(DriftKind::Sine1, 4000, 90.0, 1);
        let s = generate(&spec).unwrap();
        assert_eq!(s.len(), 4000);
        for (i, inst) in s.iter().enumerate() {
            let old = i < 2000;
            assert_eq!(sine_label(inst.features[0], inst.features[1], old), inst.label);
        }
        let pos = s.iter().filter(|i| i.label.is_positive()).count();
        let ratio = (4000 - pos) as f64 / pos as f64;
        assert!((ratio - 90.0).abs() <= 4.5, "{ratio}");
        assert_eq!(generate(&spec).unwrap(), s);
    }

    #[test]
    fn transition_probabilities() {
        let mut g = DriftStreamSpec::new(DriftKind::Sine1G, 4000, 90.0, 0);
        g.transition = 2000;
        assert_eq!(prob_old(&g, 999), 1.0);
        assert_eq!(prob_old(&g, 1000), 1.0);
        assert_eq!(prob_old(&g, 2000), 0.5);
        assert_eq!(prob_old(&g, 3000), 0.0);
        let m = DriftStreamSpec::new(DriftKind::Sine1M, 4000, 90.0, 0);
        assert_eq!(prob_old(&m, 0), 1.0);
        assert_eq!(prob_old(&m, 1000), 0.5);
        assert_eq!(prob_old(&m, 2000), 1.0);
        assert!(prob_old(&m, 1999) < 0.001);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = DriftStreamSpec::new(DriftKind::Sine1, 4000, 0.5, 0);
        assert!(matches!(generate(&spec), Err(Error::Generation(_))));
        spec.class_ratio = 90.0;
        spec.length = 10;
        assert!(generate(&spec).is_err());
        let mut g = DriftStreamSpec::new(DriftKind::Sine1G, 100, 2.0, 0);
        g.transition = 200;
        assert!(generate(&g).is_err());
        let mut rng = RngStream::new(0, 0);
        assert!(gen_sine1g(&DriftStreamSpec::new(DriftKind::Sine1, 100, 2.0, 0), &mut rng).is_err());
    }

    #[test]
    fn forgetting_scales_accumulators() {
        let s = BoostLearnerState { lambda_tp: 2.0, lambda_sum: 4.0, ..Default::default() };
        let f = apply_forgetting(s, ForgettingConfig::new(0.5).unwrap());
        assert_eq!(f.lambda_tp, 1.0);
        assert_eq!(f.lambda_sum, 2.0);
        assert_eq!(apply_forgetting(s, ForgettingConfig::default()), s);
        assert!(ForgettingConfig::new(0.0).is_err());
    }
}
