//! Permutation importance: drop in held-out F1 when one feature column is
//! shuffled. Repeat `r` of feature `j` shuffles with its own RNG stream, so
//! the ranking does not depend on scheduling.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::forest::{labels_from_scores, ForestModel};
use super::metrics::f1_score;
use super::Dataset;
use crate::error::{Error, Result};
use crate::{par, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub importance_mean: f64,
    /// Population standard deviation over repeats.
    pub importance_std: f64,
}

/// Features sorted by mean importance, descending; ties keep column order.
pub fn permutation_importance(
    model: &ForestModel,
    test: &Dataset,
    n_repeats: usize,
    seed: u64,
) -> Result<Vec<FeatureImportance>> {
    if test.n_rows() == 0 {
        return Err(Error::EmptyInput("importance rows"));
    }
    if n_repeats == 0 {
        return Err(Error::InvalidParameter("n_repeats must be >= 1".into()));
    }
    let baseline = f1_score(&test.y, &labels_from_scores(&model.predict_scores(test)?));
    let p = test.n_features;
    let drops = par::map_range(p * n_repeats, |k| {
        let (j, r) = (k / n_repeats, k % n_repeats);
        let mut col = test.column(j);
        col.shuffle(&mut rng::stream2(seed, j as u64, r as u64));
        let scores = model.scores_with(test, Some((j, &col)))?;
        Ok(baseline - f1_score(&test.y, &labels_from_scores(&scores)))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let mut out: Vec<FeatureImportance> = (0..p)
        .map(|j| {
            let d = &drops[j * n_repeats..(j + 1) * n_repeats];
            let mean = d.iter().sum::<f64>() / n_repeats as f64;
            let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n_repeats as f64;
            FeatureImportance {
                feature: test.feature_names[j].clone(),
                importance_mean: mean,
                importance_std: var.sqrt(),
            }
        })
        .collect();
    out.sort_by(|a, b| b.importance_mean.total_cmp(&a.importance_mean));
    Ok(out)
}
