//! Cross-validated cost sweeps and prequential runs.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::batch;
use crate::cost::{cost_grid, CostSpec};
use crate::data::{Dataset, Label, LabeledInstance};
use crate::drift::{self, DriftStreamSpec};
use crate::ensemble::{Algorithm, Ensemble, EnsembleConfig};
use crate::error::{Error, Result};
use crate::eval::{auc_from_scores, average_points, operating_point, prequential_online, roc_from_cost_sweep, stratified_kfold};
use crate::learners::LearnerKind;
use crate::online::OnlineEnsemble;
use crate::rng::{tag, RngStream};

use super::config::{DataSource, ExperimentConfig};
use super::io::parse_dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    Batch,
    Online,
    NsOnline,
}

impl Mode {
    pub fn id(self) -> &'static str {
        match self {
            Mode::Batch => "batch",
            Mode::Online => "online",
            Mode::NsOnline => "ns-online",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "batch" => Ok(Mode::Batch),
            "online" => Ok(Mode::Online),
            "ns-online" | "ns" => Ok(Mode::NsOnline),
            _ => Err(Error::Config(format!("unknown mode '{s}'"))),
        }
    }
}

/// A trained model of either kind.
#[derive(Debug, Clone)]
pub enum Model {
    Batch(Ensemble),
    Online(OnlineEnsemble),
}

impl Model {
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Model::Batch(e) => e.score(x),
            Model::Online(e) => e.score(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        match self {
            Model::Batch(e) => e.predict(x),
            Model::Online(e) => e.predict(x),
        }
    }

    pub fn violations(&self) -> usize {
        match self {
            Model::Batch(e) => e.violations(),
            Model::Online(e) => e.violations(),
        }
    }
}

/// Trains `algorithm` on `train`. Online modes consume the instances once, in `order`.
pub fn train_model(
    algorithm: Algorithm,
    mode: Mode,
    train: &Dataset,
    order: &[usize],
    cfg: &EnsembleConfig,
    rng: &RngStream,
) -> Result<Model> {
    match mode {
        Mode::Batch => Ok(Model::Batch(batch::train(algorithm, train, cfg, rng)?)),
        Mode::Online | Mode::NsOnline => {
            let cfg = if mode == Mode::Online { EnsembleConfig { beta: 1.0, ..*cfg } } else { *cfg };
            let mut ens = OnlineEnsemble::new(algorithm, cfg, train.dim(), rng)?;
            for &i in order {
                ens.update(train.get(i))?;
            }
            Ok(Model::Online(ens))
        }
    }
}

/// Outcome of one model on one test set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub fpr: f64,
    pub tpr: f64,
    /// Score-based AUC on the test set.
    pub auc: f64,
    pub violations: usize,
}

pub fn evaluate(model: &Model, test: &Dataset) -> Result<TestOutcome> {
    let labels = test.labels();
    let scores: Vec<f64> = test.instances().iter().map(|i| model.score(&i.features)).collect();
    let preds: Vec<Label> = test.instances().iter().map(|i| model.predict(&i.features)).collect();
    let (fpr, tpr) = operating_point(&preds, &labels)?;
    Ok(TestOutcome { fpr, tpr, auc: auc_from_scores(&scores, &labels)?, violations: model.violations() })
}

/// Trains and tests `algorithm` at every cost point of `grid`. The ensemble stream for
/// cost point `j` is `rng.child(j)`, shared across algorithms and modes.
#[allow(clippy::too_many_arguments)]
pub fn cost_sweep(
    algorithm: Algorithm,
    mode: Mode,
    train: &Dataset,
    order: &[usize],
    test: &Dataset,
    grid: &[CostSpec],
    base: &EnsembleConfig,
    rng: &RngStream,
) -> Result<Vec<TestOutcome>> {
    grid.iter()
        .enumerate()
        .map(|(j, &cost)| {
            let cfg = EnsembleConfig { cost, ..*base };
            let model = train_model(algorithm, mode, train, order, &cfg, &rng.child(j as u64))?;
            evaluate(&model, test)
        })
        .collect()
}

/// Presentation order of a training set for online learners: a seeded shuffle.
pub fn stream_order(n: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    order
}

/// Cost grid used for `algorithm` on data with the given class ratio.
pub fn grid_for(algorithm: Algorithm, class_ratio: f64, n_points: usize) -> Result<Vec<CostSpec>> {
    match algorithm.grid_kind() {
        Some(kind) => cost_grid(kind, class_ratio.max(1.0), n_points),
        None => Ok(vec![CostSpec::default()]),
    }
}

/// Fold-averaged cost-sweep ROC AUC of `algorithm` under `k`-fold CV with `seed`.
pub fn cv_roc_auc(
    data: &Dataset,
    algorithm: Algorithm,
    mode: Mode,
    base: &EnsembleConfig,
    grid: &[CostSpec],
    k: usize,
    seed: u64,
) -> Result<f64> {
    let plan = stratified_kfold(data, k, &mut RngStream::new(seed, tag::FOLDS))?;
    let per_fold = (0..k)
        .map(|f| {
            let train = data.subset(&plan.train_indices(f));
            let test = data.subset(plan.test_indices(f));
            let order = stream_order(train.len(), &mut RngStream::new(seed, tag::SHUFFLE).child(f as u64));
            let rng = RngStream::new(seed, tag::MEMBER).child(f as u64);
            let outcomes = cost_sweep(algorithm, mode, &train, &order, &test, grid, base, &rng)?;
            Ok(outcomes.iter().map(|o| (o.fpr, o.tpr)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(roc_from_cost_sweep(&average_points(&per_fold)?)?.auc)
}

/// Two-dimensional Gaussian classes: negatives around the origin, positives around
/// `(separation, separation)`, unit covariance, shuffled.
pub fn gaussian_dataset(n: usize, class_ratio: f64, separation: f64, seed: u64) -> Result<Dataset> {
    if n < 2 || !(class_ratio >= 1.0) || !class_ratio.is_finite() {
        return Err(Error::arg("need n >= 2 and a finite class ratio >= 1"));
    }
    let n_pos = ((n as f64 / (1.0 + class_ratio)).round() as usize).clamp(1, n - 1);
    let mut rng = RngStream::new(seed, tag::SYNTHETIC);
    let mut normal = || {
        let (u1, u2) = (1.0 - rng.uniform(), rng.uniform());
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut inst = Vec::with_capacity(n);
    for i in 0..n {
        let (label, mu) = if i < n_pos { (Label::Positive, separation) } else { (Label::Negative, 0.0) };
        inst.push(LabeledInstance::new(vec![mu + normal(), mu + normal()], label)?);
    }
    RngStream::new(seed, tag::SHUFFLE).shuffle(&mut inst);
    Dataset::new(inst)
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub algorithm: String,
    pub mode: String,
    pub learner: String,
    pub dataset: String,
    pub seed: u64,
    /// Fold index; -1 for prequential runs over the whole stream.
    pub fold: i64,
    pub cost_point_index: usize,
    pub c_pos: f64,
    pub c_neg: f64,
    pub c_rate: f64,
    pub fpr: f64,
    pub tpr: f64,
    pub auc: f64,
    pub violations: usize,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    algorithm: Algorithm,
    mode: Mode,
    learner: LearnerKind,
    seed: u64,
    fold: usize,
}

fn load_data(source: &DataSource) -> Result<(String, Vec<LabeledInstance>)> {
    match source {
        DataSource::File(spec) => {
            let ds = parse_dataset(&spec.path, &spec.label_column, &spec.positive_label, spec.delimiter)?;
            let name = spec.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, ds.into_instances()))
        }
        DataSource::Drift(spec) => Ok((spec.kind.to_string(), drift::generate(spec)?)),
        DataSource::Gaussian { n, class_ratio, separation, seed } => {
            Ok(("gaussian".into(), gaussian_dataset(*n, *class_ratio, *separation, *seed)?.into_instances()))
        }
    }
}

fn drift_for_seed(spec: &DriftStreamSpec, seed: u64) -> DriftStreamSpec {
    DriftStreamSpec { seed: spec.seed.wrapping_add(seed), ..*spec }
}

/// Runs every `(seed, fold, cost point)` cell of `cfg` and returns records in a
/// deterministic order. Prequential (ns-online, or any online mode on a drift source)
/// cells produce one record per seed and cost point with `fold = -1`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let (name, instances) = load_data(&cfg.data)?;
    let data = Dataset::new(instances)?;
    let counts = data.counts();
    if counts.n_pos == 0 || counts.n_neg == 0 {
        return Err(Error::Validation("the dataset must contain both classes".into()));
    }
    let class_ratio = counts.class_ratio().unwrap_or(1.0);
    let drift_source = matches!(cfg.data, DataSource::Drift(_));

    let mut cells = Vec::new();
    for &algorithm in &cfg.algorithms {
        for &mode in &cfg.modes {
            for &learner in &cfg.learners {
                for &seed in &cfg.seeds {
                    let prequential = mode == Mode::NsOnline || drift_source;
                    let folds = if prequential { 1 } else { cfg.folds };
                    for fold in 0..folds {
                        cells.push(Cell { algorithm, mode, learner, seed, fold });
                    }
                }
            }
        }
    }

    let per_cell: Vec<Vec<ResultRecord>> = cells
        .par_iter()
        .map(|cell| run_cell(cfg, &name, &data, class_ratio, drift_source, *cell))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

fn run_cell(
    cfg: &ExperimentConfig,
    name: &str,
    data: &Dataset,
    class_ratio: f64,
    drift_source: bool,
    cell: Cell,
) -> Result<Vec<ResultRecord>> {
    let grid = cfg.grid_for(cell.algorithm, class_ratio)?;
    let base = EnsembleConfig {
        members: cfg.members,
        learner: cell.learner,
        cost: CostSpec::default(),
        k_smote: cfg.k_smote,
        beta: if cell.mode == Mode::NsOnline { cfg.beta } else { 1.0 },
    };
    let record = |j: usize, cost: &CostSpec, fold: i64, o: TestOutcome, ms: u64| ResultRecord {
        algorithm: cell.algorithm.id().into(),
        mode: cell.mode.id().into(),
        learner: cell.learner.id().into(),
        dataset: name.into(),
        seed: cell.seed,
        fold,
        cost_point_index: j,
        c_pos: cost.c_pos,
        c_neg: cost.c_neg,
        c_rate: cost.c_rate,
        fpr: o.fpr,
        tpr: o.tpr,
        auc: o.auc,
        violations: o.violations,
        wall_ms: ms,
    };
    let elapsed = |t: Instant| if cfg.timing { t.elapsed().as_millis() as u64 } else { 0 };

    if cell.mode == Mode::NsOnline || drift_source {
        if cell.mode == Mode::Batch {
            return Err(Error::Config("batch mode needs a static dataset".into()));
        }
        let stream: Vec<LabeledInstance> = match &cfg.data {
            DataSource::Drift(spec) => drift::generate(&drift_for_seed(spec, cell.seed))?,
            // file rows arrive in file order; generated static data is already shuffled
            _ => data.instances().to_vec(),
        };
        let rng = RngStream::new(cell.seed, tag::MEMBER);
        return grid
            .iter()
            .enumerate()
            .map(|(j, &cost)| {
                let t = Instant::now();
                let cfg_j = EnsembleConfig { cost, ..base };
                let mut ens = OnlineEnsemble::new(cell.algorithm, cfg_j, data.dim(), &rng.child(j as u64))?;
                let labels: Vec<Label> = stream.iter().map(|i| i.label).collect();
                let pre = prequential_online(&stream, &mut ens)?;
                let preds: Vec<Label> = pre.scores.iter().map(|&s| crate::ensemble::label_from_score(s)).collect();
                let (fpr, tpr) = operating_point(&preds, &labels)?;
                let o = TestOutcome { fpr, tpr, auc: pre.auc, violations: ens.violations() };
                Ok(record(j, &cost, -1, o, elapsed(t)))
            })
            .collect();
    }

    let plan = stratified_kfold(data, cfg.folds, &mut RngStream::new(cell.seed, tag::FOLDS))?;
    let train = data.subset(&plan.train_indices(cell.fold));
    let test = data.subset(plan.test_indices(cell.fold));
    let order = stream_order(train.len(), &mut RngStream::new(cell.seed, tag::SHUFFLE).child(cell.fold as u64));
    let rng = RngStream::new(cell.seed, tag::MEMBER).child(cell.fold as u64);
    grid.iter()
        .enumerate()
        .map(|(j, &cost)| {
            let t = Instant::now();
            let cfg_j = EnsembleConfig { cost, ..base };
            let model = train_model(cell.algorithm, cell.mode, &train, &order, &cfg_j, &rng.child(j as u64))?;
            let o = evaluate(&model, &test)?;
            Ok(record(j, &cost, cell.fold as i64, o, elapsed(t)))
        })
        .collect()
}
