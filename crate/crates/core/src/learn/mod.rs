//! Binary outbreak classification: split, resampling, random forest,
//! evaluation metrics and permutation importance.

pub mod forest;
pub mod importance;
pub mod metrics;
pub mod resample;
pub mod split;

pub use forest::{train_forest, Criterion, ForestModel, ForestParams};
pub use importance::{permutation_importance, FeatureImportance};
pub use metrics::{evaluate, roc_auc, Confusion, MetricsReport};
pub use resample::{resample, ResampleMethod, Resampled, SmoteOrigin};
pub use split::{random_split, split_indices, Split, SplitSpec};

use crate::error::{Error, Result};

/// Dense row-major design matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n_features: usize,
    pub feature_names: Vec<String>,
    pub x: Vec<f64>,
    pub y: Vec<u8>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, x: Vec<f64>, y: Vec<u8>) -> Result<Self> {
        let p = feature_names.len();
        if p == 0 {
            return Err(Error::InvalidParameter("dataset needs at least one feature".into()));
        }
        if x.len() != y.len() * p {
            return Err(Error::LengthMismatch {
                expected: y.len() * p,
                found: x.len(),
            });
        }
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidParameter(format!("label at row {i} is not 0 or 1")));
        }
        Ok(Dataset {
            n_features: p,
            feature_names,
            x,
            y,
        })
    }

    /// Builds a dataset from per-feature columns.
    pub fn from_columns(names: &[&str], columns: &[Vec<f64>], y: Vec<u8>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::LengthMismatch {
                expected: names.len(),
                found: columns.len(),
            });
        }
        let n = y.len();
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                found: c.len(),
            });
        }
        let mut x = Vec::with_capacity(n * columns.len());
        for i in 0..n {
            x.extend(columns.iter().map(|c| c[i]));
        }
        Dataset::new(names.iter().map(|s| s.to_string()).collect(), x, y)
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.x.iter().skip(j).step_by(self.n_features).copied().collect()
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(idx.len() * self.n_features);
        for &i in idx {
            x.extend_from_slice(self.row(i));
        }
        Dataset {
            n_features: self.n_features,
            feature_names: self.feature_names.clone(),
            x,
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&v| v == 1).count();
        (self.y.len() - pos, pos)
    }
}
