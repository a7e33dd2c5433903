//! AUC, ROC curves from cost sweeps, stratified folds and prequential evaluation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, LabeledInstance};
use crate::error::{Error, Result};
use crate::online::OnlineEnsemble;
use crate::rng::RngStream;

/// Mann-Whitney AUC: the probability that a random positive outscores a random
/// negative, ties counting one half.
pub fn auc_from_scores(scores: &[f64], labels: &[Label]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), actual: scores.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::arg("scores must not be NaN"));
    }
    let n_pos = labels.iter().filter(|l| l.is_positive()).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc(format!("{n_pos} positives and {n_neg} negatives")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the number of correctly ordered pairs, so ties stay integral
    let mut twice = 0u64;
    let mut neg_below = 0u64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut pos_g, mut neg_g) = (0u64, 0u64);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]].is_positive() {
                pos_g += 1;
            } else {
                neg_g += 1;
            }
            j += 1;
        }
        twice += 2 * pos_g * neg_below + pos_g * neg_g;
        neg_below += neg_g;
        i = j;
    }
    Ok(twice as f64 / (2 * n_pos * n_neg) as f64)
}

/// `(FPR, TPR)` of hard predictions.
pub fn operating_point(predictions: &[Label], labels: &[Label]) -> Result<(f64, f64)> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), actual: predictions.len() });
    }
    let (mut tp, mut fp, mut pos, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &y) in predictions.iter().zip(labels) {
        if y.is_positive() {
            pos += 1;
            tp += p.is_positive() as usize;
        } else {
            neg += 1;
            fp += p.is_positive() as usize;
        }
    }
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedAuc(format!("{pos} positives and {neg} negatives")));
    }
    Ok((fp as f64 / neg as f64, tp as f64 / pos as f64))
}

/// ROC polyline through cost-sweep operating points, anchored at (0,0) and (1,1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Builds the ROC polyline: adds the anchors, sorts by `(FPR, TPR)` and integrates
/// with the trapezoid rule. Dominated points are kept.
pub fn roc_from_cost_sweep(points: &[(f64, f64)]) -> Result<RocCurve> {
    for &(f, t) in points {
        if !(0.0..=1.0).contains(&f) || !(0.0..=1.0).contains(&t) {
            return Err(Error::arg(format!("operating point ({f}, {t}) outside the unit square")));
        }
    }
    let mut pts = Vec::with_capacity(points.len() + 2);
    pts.push((0.0, 0.0));
    pts.extend_from_slice(points);
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let auc = pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum();
    Ok(RocCurve { points: pts, auc })
}

/// Pointwise mean of equally long lists of operating points.
pub fn average_points(runs: &[Vec<(f64, f64)>]) -> Result<Vec<(f64, f64)>> {
    let first = runs.first().ok_or_else(|| Error::arg("nothing to average"))?;
    if runs.iter().any(|r| r.len() != first.len()) {
        return Err(Error::arg("operating-point lists differ in length"));
    }
    let n = runs.len() as f64;
    Ok((0..first.len())
        .map(|i| {
            let (f, t) = runs.iter().fold((0.0, 0.0), |acc, r| (acc.0 + r[i].0, acc.1 + r[i].1));
            (f / n, t / n)
        })
        .collect())
}

/// `k` stratified folds of dataset indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// All indices outside `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        idx.sort_unstable();
        idx
    }
}

/// Shuffles each class, then deals positives and then negatives round-robin over the
/// folds with one running counter, so fold sizes differ by at most one.
pub fn stratified_kfold(data: &Dataset, k: usize, rng: &mut RngStream) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::arg("cross-validation needs at least two folds"));
    }
    if k > data.len() {
        return Err(Error::arg(format!("{k} folds requested for {} instances", data.len())));
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for label in [Label::Positive, Label::Negative] {
        let mut idx = data.indices_of(label);
        rng.shuffle(&mut idx);
        for i in idx {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { k, seed: rng.seed(), folds })
}

/// Per-class random split; `round(fraction * n_class)` of each class (at least one,
/// and at least one left over when the class has two or more) goes to training.
pub fn stratified_split(data: &Dataset, train_fraction: f64, rng: &mut RngStream) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::arg(format!("training fraction must lie in (0, 1) (got {train_fraction})")));
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for label in [Label::Positive, Label::Negative] {
        let mut idx = data.indices_of(label);
        if idx.is_empty() {
            continue;
        }
        rng.shuffle(&mut idx);
        let n = idx.len();
        let upper = if n >= 2 { n - 1 } else { n };
        let take = ((train_fraction * n as f64).round() as usize).clamp(1, upper);
        train.extend_from_slice(&idx[..take]);
        test.extend_from_slice(&idx[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Scores recorded before each update, and their AUC.
#[derive(Debug, Clone, PartialEq)]
pub struct PrequentialResult {
    pub auc: f64,
    pub scores: Vec<f64>,
}

/// Test-then-train over `stream`: each instance is scored by the current model and
/// only then handed to `update`.
pub fn prequential_run<M, S, U>(stream: &[LabeledInstance], model: &mut M, score: S, mut update: U) -> Result<PrequentialResult>
where
    S: Fn(&M, &[f64]) -> f64,
    U: FnMut(&mut M, &LabeledInstance) -> Result<()>,
{
    let mut scores = Vec::with_capacity(stream.len());
    for inst in stream {
        scores.push(score(model, &inst.features));
        update(model, inst)?;
    }
    let labels: Vec<Label> = stream.iter().map(|i| i.label).collect();
    let auc = auc_from_scores(&scores, &labels)?;
    Ok(PrequentialResult { auc, scores })
}

/// Prequential evaluation of an online ensemble with its normalized vote score.
pub fn prequential_online(stream: &[LabeledInstance], ens: &mut OnlineEnsemble) -> Result<PrequentialResult> {
    prequential_run(stream, ens, |e, x| e.score(x), |e, i| e.update(i))
}

/// One AUC outcome, keyed for pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucResult {
    pub dataset: String,
    pub algorithm: String,
    pub learner: String,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyEntry {
    pub dataset: String,
    pub algorithm: String,
    pub learner: String,
    pub auc_batch: f64,
    pub auc_online: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffSummary {
    pub algorithm: String,
    pub learner: String,
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub entries: Vec<ConsistencyEntry>,
    pub summaries: Vec<DiffSummary>,
}

type Key = (String, String, String);

fn keyed(results: &[AucResult], side: &str) -> Result<BTreeMap<Key, f64>> {
    let mut map = BTreeMap::new();
    for r in results {
        let key = (r.dataset.clone(), r.algorithm.clone(), r.learner.clone());
        if map.insert(key, r.auc).is_some() {
            return Err(Error::arg(format!(
                "duplicate {side} result for ({}, {}, {})",
                r.dataset, r.algorithm, r.learner
            )));
        }
    }
    Ok(map)
}

/// Pairs batch and online AUCs by `(dataset, algorithm, learner)` and summarizes the
/// absolute differences per `(algorithm, learner)`.
pub fn consistency_report(batch: &[AucResult], online: &[AucResult]) -> Result<ConsistencyReport> {
    let b = keyed(batch, "batch")?;
    let o = keyed(online, "online")?;
    if b.len() != o.len() || b.keys().any(|k| !o.contains_key(k)) {
        return Err(Error::arg("batch and online results are not paired"));
    }
    let entries: Vec<ConsistencyEntry> = b
        .iter()
        .map(|((dataset, algorithm, learner), &auc_batch)| {
            let auc_online = o[&(dataset.clone(), algorithm.clone(), learner.clone())];
            ConsistencyEntry {
                dataset: dataset.clone(),
                algorithm: algorithm.clone(),
                learner: learner.clone(),
                auc_batch,
                auc_online,
                abs_diff: (auc_batch - auc_online).abs(),
            }
        })
        .collect();
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for e in &entries {
        groups.entry((e.algorithm.clone(), e.learner.clone())).or_default().push(e.abs_diff);
    }
    let summaries = groups
        .into_iter()
        .map(|((algorithm, learner), diffs)| {
            let (mean, std) = mean_std(&diffs);
            DiffSummary { algorithm, learner, count: diffs.len(), mean, std }
        })
        .collect();
    Ok(ConsistencyReport { entries, summaries })
}

/// Mean and population standard deviation; `(NaN, NaN)` for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
