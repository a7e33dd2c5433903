//! Labelled instances, datasets and class bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary class label. `Positive` is the minority class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Negative = 0,
    Positive = 1,
}

impl Label {
    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Label::Negative),
            1 => Some(Label::Positive),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        self as u8
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

/// One feature vector with its binary label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub features: Vec<f64>,
    pub label: Label,
}

impl LabeledInstance {
    /// Builds an instance, rejecting non-finite feature values.
    pub fn new(features: Vec<f64>, label: Label) -> Result<Self> {
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("feature {i} is not finite ({})", features[i])));
        }
        Ok(Self { features, label })
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// Per-class instance counts (`n+`, `n-`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub n_pos: usize,
    pub n_neg: usize,
}

impl ClassCounts {
    pub fn new(n_pos: usize, n_neg: usize) -> Self {
        Self { n_pos, n_neg }
    }

    /// Returns the counts with the matching class incremented.
    #[must_use]
    pub fn update(self, label: Label) -> Self {
        let mut next = self;
        next.record(label);
        next
    }

    pub fn record(&mut self, label: Label) {
        match label {
            Label::Positive => self.n_pos += 1,
            Label::Negative => self.n_neg += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.n_pos + self.n_neg
    }

    /// `n- / n+`, defined only once a positive has been seen.
    pub fn class_ratio(&self) -> Option<f64> {
        (self.n_pos > 0).then(|| self.n_neg as f64 / self.n_pos as f64)
    }

    pub fn of(label: Label, counts: &Self) -> usize {
        match label {
            Label::Positive => counts.n_pos,
            Label::Negative => counts.n_neg,
        }
    }
}

/// An ordered collection of instances sharing a dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<LabeledInstance>,
    dim: usize,
    counts: ClassCounts,
}

impl Dataset {
    /// Validates dimensionality and finiteness and computes class counts.
    pub fn new(instances: Vec<LabeledInstance>) -> Result<Self> {
        let dim = instances.first().map_or(0, LabeledInstance::dim);
        let mut counts = ClassCounts::default();
        for (row, inst) in instances.iter().enumerate() {
            if inst.dim() != dim {
                return Err(Error::Validation(format!(
                    "instance {row} has {} features, expected {dim}",
                    inst.dim()
                )));
            }
            if inst.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("instance {row} has a non-finite feature")));
            }
            counts.record(inst.label);
        }
        Ok(Self { instances, dim, counts })
    }

    /// Builds a dataset from row-major features and labels.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: &[Label]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::arg(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        let instances = rows
            .into_iter()
            .zip(labels)
            .map(|(f, &l)| LabeledInstance::new(f, l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(instances)
    }

    pub fn instances(&self) -> &[LabeledInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn counts(&self) -> ClassCounts {
        self.counts
    }

    pub fn get(&self, index: usize) -> &LabeledInstance {
        &self.instances[index]
    }

    /// Indices of the instances carrying `label`, in dataset order.
    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        self.instances
            .iter()
            .enumerate()
            .filter(|(_, inst)| inst.label == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// A new dataset made of the given instances (cloned), in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let instances: Vec<_> = indices.iter().map(|&i| self.instances[i].clone()).collect();
        let mut counts = ClassCounts::default();
        for inst in &instances {
            counts.record(inst.label);
        }
        Dataset { instances, dim: self.dim, counts }
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    pub fn into_instances(self) -> Vec<LabeledInstance> {
        self.instances
    }
}
