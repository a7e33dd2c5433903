//! Incremental Gaussian base learners: naive Bayes, LDA and QDA.
//!
//! Each class keeps an effective count `t`, a running mean and a running second
//! moment, advanced with the forgetting recurrence
//!
//! ```text
//! t_n  = beta * t_{n-1} + 1
//! mu_n = (1 - 1/t_n) mu_{n-1} + (1/t_n) x_n
//! Pi_n = (1 - 1/t_n) Pi_{n-1} + (1/t_n) x_n x_n^T
//! ```
//!
//! With `beta = 1` these are the exact cumulative mean and second moment, so a learner
//! trained one instance at a time equals the batch estimate. Weighted training is
//! expressed only by presenting an instance several times.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Label, LabeledInstance};
use crate::error::{Error, Result};

/// Relative ridge added to every covariance: `tau * trace(Sigma) / d`.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Smallest diagonal loading, used when a class covariance has (near) zero trace.
const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LearnerKind {
    NaiveBayes,
    Lda,
    Qda,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [LearnerKind::NaiveBayes, LearnerKind::Lda, LearnerKind::Qda];

    pub fn id(self) -> &'static str {
        match self {
            LearnerKind::NaiveBayes => "nb",
            LearnerKind::Lda => "lda",
            LearnerKind::Qda => "qda",
        }
    }

    pub fn full_covariance(self) -> bool {
        !matches!(self, LearnerKind::NaiveBayes)
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nb" => Ok(LearnerKind::NaiveBayes),
            "lda" => Ok(LearnerKind::Lda),
            "qda" => Ok(LearnerKind::Qda),
            other => Err(Error::Config(format!("unknown learner '{other}' (expected nb, lda or qda)"))),
        }
    }
}

/// Running first and second moments of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianClassStats {
    t: f64,
    mean: Vec<f64>,
    /// Diagonal of the second moment (length d) or the full row-major d x d matrix.
    second: Vec<f64>,
    full: bool,
    beta: f64,
}

impl GaussianClassStats {
    pub fn new(dim: usize, full: bool, beta: f64) -> Self {
        let len = if full { dim * dim } else { dim };
        Self { t: 0.0, mean: vec![0.0; dim], second: vec![0.0; len], full, beta }
    }

    /// Closed-form (batch) moments of `rows`; equivalent to incremental updates with
    /// `beta = 1`.
    pub fn from_batch(rows: &[&[f64]], dim: usize, full: bool) -> Self {
        let mut stats = Self::new(dim, full, 1.0);
        if rows.is_empty() {
            return stats;
        }
        let n = rows.len() as f64;
        for r in rows {
            for i in 0..dim {
                stats.mean[i] += r[i];
                if full {
                    for j in 0..dim {
                        stats.second[i * dim + j] += r[i] * r[j];
                    }
                } else {
                    stats.second[i] += r[i] * r[i];
                }
            }
        }
        stats.mean.iter_mut().for_each(|v| *v /= n);
        stats.second.iter_mut().for_each(|v| *v /= n);
        stats.t = n;
        stats
    }

    pub fn update(&mut self, x: &[f64]) {
        self.t = self.beta * self.t + 1.0;
        let w = 1.0 / self.t;
        let keep = 1.0 - w;
        let d = self.mean.len();
        for (m, &xi) in self.mean.iter_mut().zip(x) {
            *m = keep * *m + w * xi;
        }
        if self.full {
            for i in 0..d {
                for j in 0..d {
                    let s = &mut self.second[i * d + j];
                    *s = keep * *s + w * (x[i] * x[j]);
                }
            }
        } else {
            for (s, &xi) in self.second.iter_mut().zip(x) {
                *s = keep * *s + w * (xi * xi);
            }
        }
    }

    /// Effective count `t`.
    pub fn count(&self) -> f64 {
        self.t
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    /// Second-moment entry `Pi[i][j]`; off-diagonal entries are zero for diagonal stats.
    pub fn second_moment(&self, i: usize, j: usize) -> f64 {
        if self.full {
            self.second[i * self.dim() + j]
        } else if i == j {
            self.second[i]
        } else {
            0.0
        }
    }

    /// Per-feature variances `Pi_jj - mu_j^2` (unregularized).
    pub fn variances(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.second_moment(j, j) - self.mean[j] * self.mean[j])
            .collect()
    }

    /// `Sigma = Pi - mu mu^T` (unregularized); diagonal if the stats are diagonal.
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| {
            if self.full || i == j {
                self.second_moment(i, j) - self.mean[i] * self.mean[j]
            } else {
                0.0
            }
        })
    }
}

/// Diagonal loading for a covariance with the given trace.
fn ridge_for(trace: f64, dim: usize, tau: f64) -> f64 {
    let scaled = tau * trace.max(0.0) / dim.max(1) as f64;
    scaled.max(VARIANCE_FLOOR)
}

fn regularize(mut cov: DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let d = cov.nrows();
    let ridge = ridge_for(cov.trace(), d, tau);
    for i in 0..d {
        cov[(i, i)] += ridge;
    }
    cov
}

/// Cholesky factor of a regularized covariance; increases the loading if the
/// matrix is numerically indefinite.
fn robust_cholesky(cov: DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let d = cov.nrows();
    let mut loading = 0.0;
    let base = ridge_for(cov.trace(), d, tau.max(1e-12));
    let mut attempt = regularize(cov.clone(), tau);
    for _ in 0..40 {
        if let Some(ch) = attempt.clone().cholesky() {
            return ch.l();
        }
        loading = if loading == 0.0 { base * 10.0 } else { loading * 10.0 };
        attempt = regularize(cov.clone(), tau);
        for i in 0..d {
            attempt[(i, i)] += loading;
        }
    }
    DMatrix::identity(d, d)
}

#[derive(Debug, Clone)]
struct GaussianForm {
    mean: DVector<f64>,
    chol: DMatrix<f64>,
    log_det: f64,
}

impl GaussianForm {
    fn new(mean: &[f64], cov: DMatrix<f64>, tau: f64) -> Self {
        let chol = robust_cholesky(cov, tau);
        let log_det = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Self { mean: DVector::from_column_slice(mean), chol, log_det }
    }

    /// Log density up to the shared `-d/2 log(2 pi)` term.
    fn log_density(&self, x: &[f64]) -> f64 {
        let diff = DVector::from_column_slice(x) - &self.mean;
        let y = self
            .chol
            .solve_lower_triangular(&diff)
            .unwrap_or_else(|| DVector::from_element(x.len(), f64::INFINITY));
        -0.5 * (self.log_det + y.norm_squared())
    }
}

#[derive(Debug, Clone)]
enum Fitted {
    /// Fewer than two classes observed: always negative with score 0.
    Abstain,
    NaiveBayes { log_prior: f64, pos: Vec<(f64, f64)>, neg: Vec<(f64, f64)> },
    Lda { weights: Vec<f64>, bias: f64 },
    Qda { log_prior: f64, pos: GaussianForm, neg: GaussianForm },
}

fn nb_params(stats: &GaussianClassStats, tau: f64) -> Vec<(f64, f64)> {
    let vars = stats.variances();
    let trace: f64 = vars.iter().map(|v| v.max(0.0)).sum();
    let ridge = ridge_for(trace, vars.len(), tau);
    stats
        .mean()
        .iter()
        .zip(vars)
        .map(|(&m, v)| (m, v.max(0.0) + ridge))
        .collect()
}

fn nb_log_likelihood(params: &[(f64, f64)], x: &[f64]) -> f64 {
    params
        .iter()
        .zip(x)
        .map(|(&(m, v), &xi)| -0.5 * (v.ln() + (xi - m) * (xi - m) / v))
        .sum()
}

fn logistic(logit: f64) -> f64 {
    1.0 / (1.0 + (-logit).exp())
}

/// A Gaussian classifier trained by repeated presentation of instances.
#[derive(Debug)]
pub struct BaseLearner {
    kind: LearnerKind,
    neg: GaussianClassStats,
    pos: GaussianClassStats,
    ridge: f64,
    fitted: OnceLock<Fitted>,
}

impl Clone for BaseLearner {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind,
            neg: self.neg.clone(),
            pos: self.pos.clone(),
            ridge: self.ridge,
            fitted: OnceLock::new(),
        }
    }
}

impl BaseLearner {
    pub fn new(kind: LearnerKind, dim: usize) -> Self {
        Self::with_forgetting(kind, dim, 1.0)
    }

    /// A learner whose class statistics decay with forgetting factor `beta`.
    pub fn with_forgetting(kind: LearnerKind, dim: usize, beta: f64) -> Self {
        let full = kind.full_covariance();
        Self {
            kind,
            neg: GaussianClassStats::new(dim, full, beta),
            pos: GaussianClassStats::new(dim, full, beta),
            ridge: DEFAULT_RIDGE,
            fitted: OnceLock::new(),
        }
    }

    /// Assembles a learner from precomputed class statistics.
    pub fn from_class_stats(kind: LearnerKind, neg: GaussianClassStats, pos: GaussianClassStats) -> Result<Self> {
        if neg.dim() != pos.dim() {
            return Err(Error::DimensionMismatch { expected: neg.dim(), actual: pos.dim() });
        }
        if neg.is_full() != kind.full_covariance() || pos.is_full() != kind.full_covariance() {
            return Err(Error::arg(format!("class statistics layout does not match learner {kind}")));
        }
        Ok(Self { kind, neg, pos, ridge: DEFAULT_RIDGE, fitted: OnceLock::new() })
    }

    pub fn with_ridge(mut self, tau: f64) -> Self {
        self.ridge = tau;
        self.fitted = OnceLock::new();
        self
    }

    pub fn kind(&self) -> LearnerKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.pos.dim()
    }

    pub fn class_stats(&self, label: Label) -> &GaussianClassStats {
        match label {
            Label::Positive => &self.pos,
            Label::Negative => &self.neg,
        }
    }

    /// Advances the statistics of the instance's class by one step.
    pub fn update(&mut self, instance: &LabeledInstance) -> Result<()> {
        self.update_raw(&instance.features, instance.label)
    }

    pub fn update_raw(&mut self, features: &[f64], label: Label) -> Result<()> {
        if features.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: features.len() });
        }
        match label {
            Label::Positive => self.pos.update(features),
            Label::Negative => self.neg.update(features),
        }
        self.fitted = OnceLock::new();
        Ok(())
    }

    /// Presents the same instance `times` times.
    pub fn present(&mut self, features: &[f64], label: Label, times: u64) -> Result<()> {
        for _ in 0..times {
            self.update_raw(features, label)?;
        }
        Ok(())
    }

    /// Whether both classes have been observed.
    pub fn is_ready(&self) -> bool {
        self.pos.count() > 0.0 && self.neg.count() > 0.0
    }

    /// Posterior probability of the positive class.
    ///
    /// Returns 0 until both classes have been seen.
    pub fn score(&self, features: &[f64]) -> f64 {
        assert_eq!(features.len(), self.dim(), "feature dimensionality mismatch");
        match self.fitted() {
            Fitted::Abstain => 0.0,
            fitted => logistic(Self::logit(fitted, features)),
        }
    }

    /// Positive iff the posterior exceeds 0.5; ties go to the negative class.
    pub fn predict(&self, features: &[f64]) -> Label {
        if self.score(features) > 0.5 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    fn fitted(&self) -> &Fitted {
        self.fitted.get_or_init(|| self.fit())
    }

    fn fit(&self) -> Fitted {
        if !self.is_ready() {
            return Fitted::Abstain;
        }
        let log_prior = (self.pos.count() / self.neg.count()).ln();
        match self.kind {
            LearnerKind::NaiveBayes => Fitted::NaiveBayes {
                log_prior,
                pos: nb_params(&self.pos, self.ridge),
                neg: nb_params(&self.neg, self.ridge),
            },
            LearnerKind::Lda => {
                let (tp, tn) = (self.pos.count(), self.neg.count());
                let pooled = (self.pos.covariance() * tp + self.neg.covariance() * tn) / (tp + tn);
                let chol = robust_cholesky(pooled, self.ridge);
                let mp = DVector::from_column_slice(self.pos.mean());
                let mn = DVector::from_column_slice(self.neg.mean());
                let diff = &mp - &mn;
                let half = chol.solve_lower_triangular(&diff).unwrap_or_else(|| diff.clone());
                let w = chol.transpose().solve_upper_triangular(&half).unwrap_or(half);
                let mid = (&mp + &mn) * 0.5;
                let bias = -mid.dot(&w) + log_prior;
                Fitted::Lda { weights: w.iter().copied().collect(), bias }
            }
            LearnerKind::Qda => Fitted::Qda {
                log_prior,
                pos: GaussianForm::new(self.pos.mean(), self.pos.covariance(), self.ridge),
                neg: GaussianForm::new(self.neg.mean(), self.neg.covariance(), self.ridge),
            },
        }
    }

    fn logit(fitted: &Fitted, x: &[f64]) -> f64 {
        match fitted {
            Fitted::Abstain => f64::NEG_INFINITY,
            Fitted::NaiveBayes { log_prior, pos, neg } => {
                nb_log_likelihood(pos, x) - nb_log_likelihood(neg, x) + log_prior
            }
            Fitted::Lda { weights, bias } => weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias,
            Fitted::Qda { log_prior, pos, neg } => pos.log_density(x) - neg.log_density(x) + log_prior,
        }
    }
}
