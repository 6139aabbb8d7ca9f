//! Seeded train/test partition.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    /// Split each class separately so both keep the same test fraction.
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            seed: 0,
            stratified: false,
        }
    }
}

/// Row indices of each side, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn test_size(n: usize, fraction: f64) -> usize {
    (fraction * n as f64).round() as usize
}

/// Uniformly random partition with `round(test_fraction * N)` test rows.
/// In stratified mode each class contributes `round(test_fraction * n_c)`.
pub fn split_indices(labels: &[u8], spec: &SplitSpec) -> Result<Split> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("split input"));
    }
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_fraction {} must be in (0, 1)",
            spec.test_fraction
        )));
    }
    let mut rng = rng::stream(spec.seed, 0);
    let mut test = Vec::new();
    if spec.stratified {
        for class in [0u8, 1] {
            let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
            idx.shuffle(&mut rng);
            let k = test_size(idx.len(), spec.test_fraction);
            test.extend_from_slice(&idx[..k]);
        }
    } else {
        let mut idx: Vec<usize> = (0..labels.len()).collect();
        idx.shuffle(&mut rng);
        let k = test_size(idx.len(), spec.test_fraction);
        test.extend_from_slice(&idx[..k]);
    }
    if test.is_empty() || test.len() == labels.len() {
        return Err(Error::InvalidParameter(format!(
            "test fraction {} of {} rows leaves one side empty",
            spec.test_fraction,
            labels.len()
        )));
    }
    test.sort_unstable();
    let mut in_test = vec![false; labels.len()];
    for &i in &test {
        in_test[i] = true;
    }
    let train: Vec<usize> = (0..labels.len()).filter(|&i| !in_test[i]).collect();

    let has_both = |idx: &[usize]| idx.iter().any(|&i| labels[i] == 0) && idx.iter().any(|&i| labels[i] == 1);
    if !has_both(&test) {
        log::warn!("test split holds a single class");
    }
    if !has_both(&train) {
        log::warn!("train split holds a single class");
    }
    Ok(Split { train, test })
}

pub fn random_split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let s = split_indices(&data.y, spec)?;
    Ok((data.subset(&s.train), data.subset(&s.test)))
}
