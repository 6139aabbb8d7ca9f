//! Random forest of binary CART trees.
//!
//! Each tree grows on a bootstrap sample drawn from its own RNG stream
//! (`stream t` of the forest seed), so the ensemble is identical for any
//! thread count. At every node the candidate features are visited in a
//! random order; the first `features_per_split` are scored, and further
//! features are tried only while no valid split has been found.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::Dataset;
use crate::error::{Error, Result};
use crate::{par, rng};

pub const MODEL_FORMAT: &str = "outbreak-forest";
pub const MODEL_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Gini,
    Entropy,
}

impl Criterion {
    /// Impurity of a node whose positive share is `p`.
    pub fn impurity(self, p: f64) -> f64 {
        let q = 1.0 - p;
        match self {
            Criterion::Gini => 1.0 - p * p - q * q,
            Criterion::Entropy => {
                let h = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
                h(p) + h(q)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub criterion: Criterion,
    pub n_trees: usize,
    /// `None` grows until purity or `min_leaf`.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// `None` means `ceil(sqrt(p))`.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            criterion: Criterion::Gini,
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
            seed: 0,
        }
    }
}

pub fn default_features_per_split(p: usize) -> usize {
    ((p as f64).sqrt().ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        p1: f64,
        samples: usize,
    },
}

/// Nodes in pre-order; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn leaf_p1(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Leaf { p1, .. } => return p1,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => k = if value(feature) <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((k, d)) = stack.pop() {
            best = best.max(d);
            if let Node::Split { left, right, .. } = self.nodes[k] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    /// Hyperparameters with `features_per_split` resolved.
    pub params: ForestParams,
    pub feature_names: Vec<String>,
    pub trees: Vec<Tree>,
}

struct Grower<'a> {
    data: &'a Dataset,
    criterion: Criterion,
    max_depth: usize,
    min_leaf: usize,
    mtry: usize,
}

/// Node awaiting growth: samples, depth, and the parent slot to patch.
type Pending = (Vec<usize>, usize, Option<(usize, bool)>);

struct BestSplit {
    feature: usize,
    threshold: f64,
    child_impurity: f64,
}

impl Grower<'_> {
    fn value(&self, i: usize, f: usize) -> f64 {
        self.data.x[i * self.data.n_features + f]
    }

    fn best_for_feature(&self, samples: &[usize], f: usize, buf: &mut Vec<(f64, u8)>) -> Option<BestSplit> {
        buf.clear();
        buf.extend(samples.iter().map(|&i| (self.value(i, f), self.data.y[i])));
        buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = buf.len();
        let total_pos = buf.iter().filter(|s| s.1 == 1).count();
        let mut best: Option<BestSplit> = None;
        let mut pos_left = 0usize;
        for i in 0..n - 1 {
            pos_left += buf[i].1 as usize;
            let n_left = i + 1;
            if buf[i].0 == buf[i + 1].0 || n_left < self.min_leaf || n - n_left < self.min_leaf {
                continue;
            }
            let n_right = n - n_left;
            let imp_l = self.criterion.impurity(pos_left as f64 / n_left as f64);
            let imp_r = self.criterion.impurity((total_pos - pos_left) as f64 / n_right as f64);
            let child = (n_left as f64 * imp_l + n_right as f64 * imp_r) / n as f64;
            if best.as_ref().is_none_or(|b| child < b.child_impurity) {
                let (a, b) = (buf[i].0, buf[i + 1].0);
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    child_impurity: child,
                });
            }
        }
        best
    }

    fn grow(&self, bootstrap: Vec<usize>, rng: &mut impl Rng) -> Tree {
        let p = self.data.n_features;
        let mut nodes: Vec<Node> = Vec::new();
        let mut buf = Vec::new();
        let mut order: Vec<usize> = (0..p).collect();
        let mut stack: Vec<Pending> = vec![(bootstrap, 0, None)];
        while let Some((samples, depth, parent)) = stack.pop() {
            let idx = nodes.len();
            if let Some((pi, is_left)) = parent {
                if let Node::Split { left, right, .. } = &mut nodes[pi] {
                    if is_left {
                        *left = idx;
                    } else {
                        *right = idx;
                    }
                }
            }
            let n = samples.len();
            let pos = samples.iter().filter(|&&i| self.data.y[i] == 1).count();
            let leaf = Node::Leaf {
                p1: pos as f64 / n as f64,
                samples: n,
            };
            if pos == 0 || pos == n || depth >= self.max_depth || n < 2 * self.min_leaf {
                nodes.push(leaf);
                continue;
            }

            let mut best: Option<BestSplit> = None;
            for t in 0..p {
                if t >= self.mtry && best.is_some() {
                    break;
                }
                let r = rng.random_range(t..p);
                order.swap(t, r);
                if let Some(s) = self.best_for_feature(&samples, order[t], &mut buf) {
                    if best.as_ref().is_none_or(|b| s.child_impurity < b.child_impurity) {
                        best = Some(s);
                    }
                }
            }
            let Some(best) = best else {
                nodes.push(leaf);
                continue;
            };
            let (left, right): (Vec<usize>, Vec<usize>) = samples
                .iter()
                .partition(|&&i| self.value(i, best.feature) <= best.threshold);
            nodes.push(Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left: 0,
                right: 0,
            });
            stack.push((right, depth + 1, Some((idx, false))));
            stack.push((left, depth + 1, Some((idx, true))));
        }
        Tree { nodes }
    }
}

pub fn train_forest(train: &Dataset, params: &ForestParams) -> Result<ForestModel> {
    let n = train.n_rows();
    let p = train.n_features;
    if n < 2 {
        return Err(Error::InsufficientRegions { required: 2, found: n });
    }
    if p == 0 {
        return Err(Error::InvalidParameter("no features".into()));
    }
    if params.n_trees == 0 || params.min_leaf == 0 {
        return Err(Error::InvalidParameter("n_trees and min_leaf must be >= 1".into()));
    }
    if params.max_depth == Some(0) {
        return Err(Error::InvalidParameter("max_depth must be >= 1".into()));
    }
    if let Some(i) = train.x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite feature value at row {}",
            i / p
        )));
    }
    let mtry = params.features_per_split.unwrap_or_else(|| default_features_per_split(p));
    if mtry == 0 || mtry > p {
        return Err(Error::InvalidParameter(format!("features_per_split {mtry} not in 1..={p}")));
    }
    let (neg, pos) = train.class_counts();
    if neg == 0 || pos == 0 {
        log::warn!("training data holds a single class; every tree is one leaf");
    }

    let grower = Grower {
        data: train,
        criterion: params.criterion,
        max_depth: params.max_depth.unwrap_or(usize::MAX),
        min_leaf: params.min_leaf,
        mtry,
    };
    let trees = par::map_range(params.n_trees, |t| {
        let mut rng = rng::stream(params.seed, t as u64);
        let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        grower.grow(bootstrap, &mut rng)
    });
    Ok(ForestModel {
        params: ForestParams {
            features_per_split: Some(mtry),
            ..*params
        },
        feature_names: train.feature_names.clone(),
        trees,
    })
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    fn check_schema(&self, data: &Dataset) -> Result<()> {
        if data.feature_names != self.feature_names {
            return Err(Error::SchemaMismatch {
                expected: self.feature_names.join(","),
                found: data.feature_names.join(","),
            });
        }
        Ok(())
    }

    /// Mean class-1 leaf probability over trees; column `j` may be replaced
    /// by `column` (used for permutation importance).
    pub fn scores_with(&self, data: &Dataset, replace: Option<(usize, &[f64])>) -> Result<Vec<f64>> {
        self.check_schema(data)?;
        if let Some((j, col)) = replace {
            if j >= data.n_features || col.len() != data.n_rows() {
                return Err(Error::LengthMismatch {
                    expected: data.n_rows(),
                    found: col.len(),
                });
            }
        }
        let k = self.trees.len() as f64;
        Ok(par::map_range(data.n_rows(), |i| {
            let row = data.row(i);
            let value = |f: usize| match replace {
                Some((j, col)) if j == f => col[i],
                _ => row[f],
            };
            self.trees.iter().map(|t| t.leaf_p1(value)).sum::<f64>() / k
        }))
    }

    pub fn predict_scores(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.scores_with(data, None)
    }

    /// `(labels, scores)` with label = score >= 0.5.
    pub fn predict(&self, data: &Dataset) -> Result<(Vec<u8>, Vec<f64>)> {
        let scores = self.predict_scores(data)?;
        Ok((labels_from_scores(&scores), scores))
    }

    pub fn to_json(&self) -> Value {
        let trees: Vec<Value> = self.trees.iter().map(|t| node_json(t, 0, &self.feature_names)).collect();
        json!({
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "criterion": self.params.criterion,
            "n_trees": self.params.n_trees,
            "max_depth": self.params.max_depth,
            "min_leaf": self.params.min_leaf,
            "features_per_split": self.params.features_per_split,
            "seed": self.params.seed,
            "feature_names": self.feature_names,
            "trees": trees,
        })
    }

    pub fn from_json(doc: &Value) -> Result<Self> {
        let bad = |m: &str| Error::ModelFormat(m.to_string());
        if doc.get("format").and_then(Value::as_str) != Some(MODEL_FORMAT) {
            return Err(bad("not a forest model document"));
        }
        match doc.get("version").and_then(Value::as_u64) {
            Some(MODEL_VERSION) => {}
            other => return Err(bad(&format!("unsupported model version {other:?}"))),
        }
        let field = |k: &str| doc.get(k).cloned().ok_or_else(|| bad(&format!("missing {k}")));
        let params = ForestParams {
            criterion: serde_json::from_value(field("criterion")?)?,
            n_trees: serde_json::from_value(field("n_trees")?)?,
            max_depth: serde_json::from_value(field("max_depth")?)?,
            min_leaf: serde_json::from_value(field("min_leaf")?)?,
            features_per_split: serde_json::from_value(field("features_per_split")?)?,
            seed: serde_json::from_value(field("seed")?)?,
        };
        let feature_names: Vec<String> = serde_json::from_value(field("feature_names")?)?;
        let trees = doc
            .get("trees")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing trees"))?
            .iter()
            .map(|t| tree_from_json(t, feature_names.len()))
            .collect::<Result<Vec<_>>>()?;
        if trees.len() != params.n_trees {
            return Err(bad("tree count does not match n_trees"));
        }
        Ok(ForestModel {
            params,
            feature_names,
            trees,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(&self.to_json())?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&parse_unbounded(&text)?)
    }
}

pub fn labels_from_scores(scores: &[f64]) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s >= 0.5)).collect()
}

/// Parses JSON without a nesting limit; deep trees nest deeply.
pub fn parse_unbounded(text: &str) -> Result<Value> {
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let v = Value::deserialize(&mut de)?;
    de.end()?;
    Ok(v)
}

fn node_json(tree: &Tree, k: usize, names: &[String]) -> Value {
    match tree.nodes[k] {
        Node::Leaf { p1, samples } => json!({ "proba": [1.0 - p1, p1], "samples": samples }),
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => json!({
            "feature": feature,
            "name": names[feature],
            "threshold": threshold,
            "left": node_json(tree, left, names),
            "right": node_json(tree, right, names),
        }),
    }
}

fn tree_from_json(root: &Value, n_features: usize) -> Result<Tree> {
    let bad = |m: &str| Error::ModelFormat(m.to_string());
    let mut nodes = Vec::new();
    let mut stack: Vec<(&Value, Option<(usize, bool)>)> = vec![(root, None)];
    while let Some((v, parent)) = stack.pop() {
        let idx = nodes.len();
        if let Some((pi, is_left)) = parent {
            if let Node::Split { left, right, .. } = &mut nodes[pi] {
                if is_left {
                    *left = idx;
                } else {
                    *right = idx;
                }
            }
        }
        if let Some(proba) = v.get("proba") {
            let pr: [f64; 2] = serde_json::from_value(proba.clone())?;
            if !(0.0..=1.0).contains(&pr[1]) || (pr[0] + pr[1] - 1.0).abs() > 1e-9 {
                return Err(bad("leaf probabilities must lie in [0, 1] and sum to 1"));
            }
            let samples = v.get("samples").and_then(Value::as_u64).unwrap_or(0) as usize;
            nodes.push(Node::Leaf { p1: pr[1], samples });
            continue;
        }
        let feature = v
            .get("feature")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("node has neither proba nor feature"))? as usize;
        if feature >= n_features {
            return Err(bad("split feature out of range"));
        }
        let threshold = v
            .get("threshold")
            .and_then(Value::as_f64)
            .ok_or_else(|| bad("split without threshold"))?;
        let (l, r) = match (v.get("left"), v.get("right")) {
            (Some(l), Some(r)) => (l, r),
            _ => return Err(bad("split without both children")),
        };
        nodes.push(Node::Split {
            feature,
            threshold,
            left: 0,
            right: 0,
        });
        stack.push((r, Some((idx, false))));
        stack.push((l, Some((idx, true))));
    }
    Ok(Tree { nodes })
}
