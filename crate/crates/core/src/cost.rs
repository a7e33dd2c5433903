use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

/// Misclassification costs and sampling rate for one operating point.
///
/// `c_pos`/`c_neg` drive the cost-sensitive boosting updates; `c_rate` is the
/// resampling rate used by the sampling-based ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub c_pos: f64,
    pub c_neg: f64,
    pub c_rate: f64,
}

impl Default for CostSpec {
    fn default() -> Self {
        Self { c_pos: 1.0, c_neg: 1.0, c_rate: 1.0 }
    }
}

impl CostSpec {
    pub fn new(c_pos: f64, c_neg: f64, c_rate: f64) -> Result<Self> {
        let spec = Self { c_pos, c_neg, c_rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn costs(c_pos: f64, c_neg: f64) -> Result<Self> {
        Self::new(c_pos, c_neg, 1.0)
    }

    pub fn rate(c_rate: f64) -> Result<Self> {
        Self::new(1.0, 1.0, c_rate)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.c_pos.is_finite() && self.c_neg.is_finite() && self.c_rate.is_finite();
        if !finite || self.c_neg <= 0.0 || self.c_pos < self.c_neg {
            return Err(Error::arg(format!(
                "costs must satisfy c_pos >= c_neg > 0 (got c_pos={}, c_neg={})",
                self.c_pos, self.c_neg
            )));
        }
        if self.c_rate < 1.0 {
            return Err(Error::arg(format!("sampling rate must be >= 1 (got {})", self.c_rate)));
        }
        Ok(())
    }

    /// `C_n`: the misclassification cost attached to an instance of class `label`.
    pub fn cost_of(&self, label: Label) -> f64 {
        match label {
            Label::Positive => self.c_pos,
            Label::Negative => self.c_neg,
        }
    }
}

/// Which parameter a cost sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    /// `c_pos = 1`, `c_neg` swept over `[0.1, 1]`.
    CostRatio,
    /// `c_rate` swept over `[1, class_ratio]`.
    SamplingRate,
}

pub const MIN_NEGATIVE_COST: f64 = 0.1;

/// Evenly spaced operating points with exact endpoints, in ascending order of the
/// swept parameter.
pub fn cost_grid(kind: GridKind, class_ratio: f64, n_points: usize) -> Result<Vec<CostSpec>> {
    if !(class_ratio >= 1.0) || !class_ratio.is_finite() {
        return Err(Error::arg(format!("class ratio must be >= 1 (got {class_ratio})")));
    }
    if n_points < 2 {
        return Err(Error::arg(format!("a cost grid needs at least 2 points (got {n_points})")));
    }
    let (lo, hi) = match kind {
        GridKind::CostRatio => (MIN_NEGATIVE_COST, 1.0),
        GridKind::SamplingRate => (1.0, class_ratio),
    };
    let last = n_points - 1;
    let grid = (0..n_points)
        .map(|i| {
            let v = if i == last { hi } else { lo + (hi - lo) * i as f64 / last as f64 };
            match kind {
                GridKind::CostRatio => CostSpec { c_pos: 1.0, c_neg: v, c_rate: 1.0 },
                GridKind::SamplingRate => CostSpec { c_pos: 1.0, c_neg: 1.0, c_rate: v },
            }
        })
        .collect();
    Ok(grid)
}
