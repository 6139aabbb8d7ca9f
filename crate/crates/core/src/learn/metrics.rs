//! Binary classification metrics. Ratios with a zero denominator are reported
//! as 0 and named in `undefined`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn from_labels(truth: &[u8], pred: &[u8]) -> Confusion {
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(pred) {
            match (t, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (1, 0) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub mcc: f64,
    pub roc_auc: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub confusion: Confusion,
    /// Metrics whose denominator was zero (reported as 0).
    pub undefined: Vec<String>,
}

fn ratio(num: f64, den: f64, name: &str, undefined: &mut Vec<String>) -> f64 {
    if den == 0.0 {
        undefined.push(name.to_string());
        0.0
    } else {
        num / den
    }
}

/// Metrics from a confusion matrix alone; `roc_auc` is left at 0.
pub fn from_confusion(c: Confusion) -> MetricsReport {
    let mut undefined = Vec::new();
    let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
    let accuracy = ratio(tp + tn, c.total() as f64, "accuracy", &mut undefined);
    let precision = ratio(tp, tp + fp, "precision", &mut undefined);
    let recall = ratio(tp, tp + fn_, "recall", &mut undefined);
    let specificity = ratio(tn, tn + fp, "specificity", &mut undefined);
    let f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn_, "f1", &mut undefined);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    let mcc = ratio(tp * tn - fp * fn_, den.sqrt(), "mcc", &mut undefined);
    MetricsReport {
        accuracy,
        balanced_accuracy: (recall + specificity) / 2.0,
        mcc,
        roc_auc: 0.0,
        f1,
        precision,
        recall,
        confusion: c,
        undefined,
    }
}

/// Area under the ROC curve from the Mann-Whitney rank sum with average
/// ranks for ties. `None` when either class is absent.
pub fn roc_auc(truth: &[u8], scores: &[f64]) -> Option<f64> {
    let n_pos = truth.iter().filter(|&&t| t == 1).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let avg = (i + j + 2) as f64 / 2.0;
        let pos_in_group = idx[i..=j].iter().filter(|&&k| truth[k] == 1).count();
        rank_sum += avg * pos_in_group as f64;
        i = j + 1;
    }
    let np = n_pos as f64;
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

pub fn evaluate(truth: &[u8], pred: &[u8], scores: &[f64]) -> Result<MetricsReport> {
    if truth.is_empty() {
        return Err(Error::EmptyInput("labels"));
    }
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if scores.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            found: scores.len(),
        });
    }
    if truth.iter().chain(pred).any(|&v| v > 1) {
        return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("scores contain NaN".into()));
    }
    let mut report = from_confusion(Confusion::from_labels(truth, pred));
    match roc_auc(truth, scores) {
        Some(a) => report.roc_auc = a,
        None => report.undefined.push("roc_auc".into()),
    }
    Ok(report)
}

/// F1 of predicted labels, 0 when undefined.
pub fn f1_score(truth: &[u8], pred: &[u8]) -> f64 {
    from_confusion(Confusion::from_labels(truth, pred)).f1
}
