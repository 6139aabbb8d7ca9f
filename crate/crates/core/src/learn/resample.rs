//! Class rebalancing of a training set: random undersampling and SMOTE.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::{par, rng};

pub const DEFAULT_SMOTE_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ResampleMethod {
    #[default]
    None,
    Undersample,
    Smote,
}

/// Parents of a synthetic row: `row = x[parent] + u * (x[neighbor] - x[parent])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoteOrigin {
    pub parent: usize,
    pub neighbor: usize,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub data: Dataset,
    /// One entry per synthetic row; synthetic rows follow the original rows.
    pub synthetic: Vec<SmoteOrigin>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn resample(data: &Dataset, method: ResampleMethod, seed: u64, k: usize) -> Result<Resampled> {
    if method == ResampleMethod::None {
        return Ok(Resampled {
            data: data.clone(),
            synthetic: Vec::new(),
        });
    }
    let (neg, pos) = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::InvalidParameter("resampling needs both classes present".into()));
    }
    let minority_class = u8::from(pos < neg);
    let minority: Vec<usize> = (0..data.n_rows()).filter(|&i| data.y[i] == minority_class).collect();
    let majority: Vec<usize> = (0..data.n_rows()).filter(|&i| data.y[i] != minority_class).collect();
    let mut rng = rng::stream(seed, 0);

    match method {
        ResampleMethod::None => unreachable!(),
        ResampleMethod::Undersample => {
            let mut drop = majority.clone();
            drop.shuffle(&mut rng);
            let mut keep = vec![true; data.n_rows()];
            for &i in &drop[minority.len()..] {
                keep[i] = false;
            }
            let idx: Vec<usize> = (0..data.n_rows()).filter(|&i| keep[i]).collect();
            Ok(Resampled {
                data: data.subset(&idx),
                synthetic: Vec::new(),
            })
        }
        ResampleMethod::Smote => {
            let m = minority.len();
            if m < 2 {
                return Err(Error::InvalidParameter(format!(
                    "SMOTE needs at least 2 minority rows, found {m}"
                )));
            }
            if k == 0 {
                return Err(Error::InvalidParameter("SMOTE k must be >= 1".into()));
            }
            let k = k.min(m - 1);
            // k nearest minority neighbours, ties broken by row order.
            let knn: Vec<Vec<usize>> = par::map_range(m, |a| {
                let xa = data.row(minority[a]);
                let mut d: Vec<(f64, usize)> = (0..m)
                    .filter(|&b| b != a)
                    .map(|b| (squared_distance(xa, data.row(minority[b])), b))
                    .collect();
                d.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
                d.truncate(k);
                d.into_iter().map(|(_, b)| minority[b]).collect()
            });

            let need = majority.len() - m;
            let mut out = data.clone();
            out.x.reserve(need * data.n_features);
            let mut synthetic = Vec::with_capacity(need);
            for _ in 0..need {
                let a = rng.random_range(0..m);
                let b = knn[a][rng.random_range(0..k)];
                let u: f64 = rng.random();
                let parent = minority[a];
                let (xa, xb) = (data.row(parent), data.row(b));
                out.x.extend(xa.iter().zip(xb).map(|(p, q)| p + u * (q - p)));
                out.y.push(minority_class);
                synthetic.push(SmoteOrigin { parent, neighbor: b, u });
            }
            Ok(Resampled { data: out, synthetic })
        }
    }
}
