//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::cost::{cost_grid, CostSpec, GridKind};
use crate::drift::{DriftKind, DriftStreamSpec, DEFAULT_TRANSITION};
use crate::ensemble::Algorithm;
use crate::error::{Error, Result};
use crate::learners::LearnerKind;

use super::experiment::Mode;
use super::io::LabelColumn;

/// Parsed `key = value` pairs. `#` starts a comment; blank lines are ignored.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            let key = k.trim().to_ascii_lowercase();
            if entries.insert(key.clone(), (n + 1, v.trim().to_string())).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", n + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {line}: invalid value '{v}' for '{key}'"))),
        }
    }

    pub fn list<T: FromStr<Err = Error>>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<T>().map_err(|e| Error::Config(format!("line {line}: {e}"))))
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    /// Keys not in `known`, for typo detection.
    pub fn unknown_keys(&self, known: &[&str]) -> Vec<String> {
        self.entries.keys().filter(|k| !known.contains(&k.as_str())).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileSpec {
    pub path: PathBuf,
    pub label_column: LabelColumn,
    pub positive_label: String,
    pub delimiter: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(FileSpec),
    Drift(DriftStreamSpec),
    Gaussian { n: usize, class_ratio: f64, separation: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Jsonl,
    Both,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" => Ok(ReportFormat::Jsonl),
            "both" => Ok(ReportFormat::Both),
            _ => Err(Error::Config(format!("unknown report format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub algorithms: Vec<Algorithm>,
    pub modes: Vec<Mode>,
    pub learners: Vec<LearnerKind>,
    pub members: usize,
    pub k_smote: usize,
    pub grid_points: usize,
    /// Fixed `C_N` instead of a sweep, for cost-ratio algorithms.
    pub c_neg: Option<f64>,
    /// Fixed `C` instead of a sweep, for sampling-rate algorithms.
    pub c_rate: Option<f64>,
    pub folds: usize,
    pub seeds: Vec<u64>,
    /// Forgetting factor of ns-online runs.
    pub beta: f64,
    /// Record real wall times; off by default so reports are reproducible byte for byte.
    pub timing: bool,
    pub output: PathBuf,
    pub format: ReportFormat,
}

const KEYS: &[&str] = &[
    "dataset",
    "label_column",
    "positive_label",
    "delimiter",
    "drift",
    "drift_length",
    "drift_ratio",
    "drift_transition",
    "drift_seed",
    "synthetic",
    "synthetic_n",
    "synthetic_ratio",
    "synthetic_separation",
    "synthetic_seed",
    "algorithms",
    "modes",
    "learners",
    "members",
    "k_smote",
    "grid_points",
    "c_neg",
    "c_rate",
    "folds",
    "seeds",
    "beta",
    "timing",
    "output",
    "format",
];

/// Drift-stream description shared by `run` configs and `gen-stream` files.
pub fn drift_spec_from(kv: &KeyValues, kind_key: &str, prefix: &str) -> Result<Option<DriftStreamSpec>> {
    let Some(kind) = kv.get(kind_key) else { return Ok(None) };
    let kind: DriftKind = kind.parse()?;
    let key = |s: &str| format!("{prefix}{s}");
    let length = kv.parsed(&key("length"))?.unwrap_or(4000);
    let mut spec = DriftStreamSpec::new(kind, length, kv.parsed(&key("ratio"))?.unwrap_or(90.0), 0);
    spec.transition = kv.parsed(&key("transition"))?.unwrap_or(DEFAULT_TRANSITION.min(length));
    spec.seed = kv.parsed(&key("seed"))?.unwrap_or(0);
    Ok(Some(spec))
}

impl ExperimentConfig {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let unknown = kv.unknown_keys(KEYS);
        if !unknown.is_empty() {
            return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
        }
        let mut sources = Vec::new();
        if let Some(path) = kv.get("dataset") {
            let positive_label = kv
                .get("positive_label")
                .ok_or_else(|| Error::Config("'positive_label' is required with 'dataset'".into()))?
                .to_string();
            let delimiter = match kv.get("delimiter") {
                None => b',',
                Some("tab") | Some("\\t") => b'\t',
                Some(d) if d.len() == 1 => d.as_bytes()[0],
                Some(d) => return Err(Error::Config(format!("delimiter must be one character (got '{d}')"))),
            };
            sources.push(DataSource::File(FileSpec {
                path: PathBuf::from(path),
                label_column: kv.get("label_column").unwrap_or("-1").parse()?,
                positive_label,
                delimiter,
            }));
        }
        if let Some(spec) = drift_spec_from(kv, "drift", "drift_")? {
            sources.push(DataSource::Drift(spec));
        }
        if let Some(kind) = kv.get("synthetic") {
            if kind != "gaussian" {
                return Err(Error::Config(format!("unknown synthetic generator '{kind}'")));
            }
            sources.push(DataSource::Gaussian {
                n: kv.parsed("synthetic_n")?.unwrap_or(2000),
                class_ratio: kv.parsed("synthetic_ratio")?.unwrap_or(10.0),
                separation: kv.parsed("synthetic_separation")?.unwrap_or(1.5),
                seed: kv.parsed("synthetic_seed")?.unwrap_or(0),
            });
        }
        if sources.len() != 1 {
            return Err(Error::Config("exactly one of 'dataset', 'drift' or 'synthetic' must be given".into()));
        }
        let cfg = Self {
            data: sources.pop().expect("one source"),
            algorithms: kv
                .list("algorithms")?
                .ok_or_else(|| Error::Config("'algorithms' is required".into()))?,
            modes: kv.list("modes")?.unwrap_or_else(|| vec![Mode::Batch, Mode::Online]),
            learners: kv.list("learners")?.unwrap_or_else(|| vec![LearnerKind::NaiveBayes]),
            members: kv.parsed("members")?.unwrap_or(10),
            k_smote: kv.parsed("k_smote")?.unwrap_or(5),
            grid_points: kv.parsed("grid_points")?.unwrap_or(10),
            c_neg: kv.parsed("c_neg")?,
            c_rate: kv.parsed("c_rate")?,
            folds: kv.parsed("folds")?.unwrap_or(5),
            seeds: kv.list::<SeedValue>("seeds")?.map(|v| v.into_iter().map(|s| s.0).collect()).unwrap_or(vec![1]),
            beta: kv.parsed("beta")?.unwrap_or(0.9),
            timing: kv.parsed("timing")?.unwrap_or(false),
            output: PathBuf::from(kv.get("output").unwrap_or("results")),
            format: kv.parsed("format")?.unwrap_or(ReportFormat::Csv),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_key_values(&KeyValues::read(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.algorithms.is_empty() || self.modes.is_empty() || self.learners.is_empty() || self.seeds.is_empty() {
            return bad("algorithms, modes, learners and seeds must be nonempty".into());
        }
        if self.members == 0 || self.k_smote == 0 {
            return bad("members and k_smote must be at least 1".into());
        }
        if self.grid_points < 2 {
            return bad("grid_points must be at least 2".into());
        }
        if self.folds < 2 {
            return bad("folds must be at least 2".into());
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return bad(format!("beta must lie in (0, 1] (got {})", self.beta));
        }
        if let Some(c) = self.c_neg {
            if !(c > 0.0 && c <= 1.0) {
                return bad(format!("c_neg must lie in (0, 1] (got {c})"));
            }
        }
        if let Some(c) = self.c_rate {
            if !(c >= 1.0 && c.is_finite()) {
                return bad(format!("c_rate must be at least 1 (got {c})"));
            }
        }
        if matches!(self.data, DataSource::Drift(_)) && self.modes.contains(&Mode::Batch) {
            return bad("drift streams are evaluated prequentially; batch mode is not available".into());
        }
        Ok(())
    }

    /// Cost points swept for `algorithm`, honouring fixed `c_neg`/`c_rate`.
    pub fn grid_for(&self, algorithm: Algorithm, class_ratio: f64) -> Result<Vec<CostSpec>> {
        match (algorithm.grid_kind(), self.c_neg, self.c_rate) {
            (Some(GridKind::CostRatio), Some(c_neg), _) => Ok(vec![CostSpec::costs(1.0, c_neg)?]),
            (Some(GridKind::SamplingRate), _, Some(c)) => Ok(vec![CostSpec::rate(c)?]),
            (Some(kind), _, _) => cost_grid(kind, class_ratio.max(1.0), self.grid_points),
            (None, _, _) => Ok(vec![CostSpec::default()]),
        }
    }
}

struct SeedValue(u64);

impl FromStr for SeedValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse().map(SeedValue).map_err(|_| Error::Config(format!("invalid seed '{s}'")))
    }
}
