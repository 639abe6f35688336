//! CART trees: Gini classification trees and variance-reduction regression
//! trees (the latter are the weak learners for boosting).

use serde::{Deserialize, Serialize};

use super::{argmax, Classifier};
use crate::error::{Error, Result};
use crate::vectorize::DocumentTermMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class_counts: Vec<usize>,
    },
}

/// Classification tree. Node 0 is the root; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<TreeNode>,
    pub n_classes: usize,
    pub n_features: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl TreeModel {
    fn leaf(&self, x: &[f64]) -> &[usize] {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                TreeNode::Leaf { class_counts } => return class_counts,
            }
        }
    }

    /// `(feature, threshold)` of the root, or `None` for a single leaf.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            TreeNode::Split {
                feature, threshold, ..
            } => Some((*feature, *threshold)),
            TreeNode::Leaf { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
                TreeNode::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

impl Classifier for TreeModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let counts = self.leaf(x);
        let total: usize = counts.iter().sum();
        let dist: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        (argmax(&dist), dist)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegressionNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<RegressionNode>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                RegressionNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                RegressionNode::Leaf { value } => return *value,
            }
        }
    }
}

/// Column-major copy of the training features with every column presorted
/// by `(value, row)`. Shared by all trees grown on the same data.
pub(crate) struct FeatureMatrix {
    pub n_rows: usize,
    pub cols: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl FeatureMatrix {
    pub fn from_dtm(dtm: &DocumentTermMatrix) -> Self {
        let n_rows = dtm.num_docs();
        let mut cols = vec![vec![0.0; n_rows]; dtm.num_terms()];
        for (i, row) in dtm.rows().iter().enumerate() {
            for &(j, c) in row {
                cols[j][i] = f64::from(c);
            }
        }
        let order = cols
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..n_rows as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        FeatureMatrix {
            n_rows,
            cols,
            order,
        }
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.cols.iter().map(|c| c[i]).collect()
    }

    /// Node rows of `feature` in `(value, row)` order.
    fn sorted_rows(&self, feature: usize, rows: &[usize], in_node: &[bool], out: &mut Vec<usize>) {
        out.clear();
        let m = rows.len();
        let log_m = (usize::BITS - m.leading_zeros()) as usize;
        if m * log_m.max(1) < self.n_rows {
            let col = &self.cols[feature];
            out.extend_from_slice(rows);
            out.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        } else {
            out.extend(
                self.order[feature]
                    .iter()
                    .map(|&i| i as usize)
                    .filter(|&i| in_node[i]),
            );
        }
    }
}

/// `a/b > c/d` for non-negative integers with positive denominators.
fn frac_gt(a: u128, b: u128, c: u128, d: u128) -> bool {
    a * d > c * b
}

struct ClassGrower<'a, F> {
    x: &'a FeatureMatrix,
    labels: &'a [usize],
    weights: &'a [usize],
    n_classes: usize,
    params: TreeParams,
    pick_features: F,
    in_node: Vec<bool>,
    scratch: Vec<usize>,
    nodes: Vec<TreeNode>,
}

impl<F: FnMut(usize) -> Vec<usize>> ClassGrower<'_, F> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &r in rows {
            c[self.labels[r]] += self.weights[r];
        }
        c
    }

    /// Best Gini split among candidate features: maximizes
    /// `Σc_L²/n_L + Σc_R²/n_R`, compared exactly in integers.
    fn best_split(&mut self, rows: &[usize], total: &[usize]) -> Option<(usize, f64)> {
        let n_total: usize = total.iter().sum();
        let mut features = (self.pick_features)(self.x.n_features());
        features.sort_unstable();
        for &r in rows {
            self.in_node[r] = true;
        }
        let mut best: Option<(usize, f64, u128, u128)> = None;
        let mut sorted = std::mem::take(&mut self.scratch);
        for f in features {
            self.x.sorted_rows(f, rows, &self.in_node, &mut sorted);
            let col = &self.x.cols[f];
            let mut left = vec![0usize; self.n_classes];
            let mut n_left = 0usize;
            for k in 0..sorted.len().saturating_sub(1) {
                let r = sorted[k];
                left[self.labels[r]] += self.weights[r];
                n_left += self.weights[r];
                let (v, next) = (col[r], col[sorted[k + 1]]);
                if v >= next {
                    continue;
                }
                let n_right = n_total - n_left;
                let sl: u128 = left.iter().map(|&c| (c * c) as u128).sum();
                let sr: u128 = left
                    .iter()
                    .zip(total)
                    .map(|(&l, &t)| ((t - l) * (t - l)) as u128)
                    .sum();
                let num = sl * n_right as u128 + sr * n_left as u128;
                let den = (n_left * n_right) as u128;
                let better = match best {
                    None => true,
                    Some((_, _, bn, bd)) => frac_gt(num, den, bn, bd),
                };
                if better {
                    best = Some((f, (v + next) / 2.0, num, den));
                }
            }
        }
        self.scratch = sorted;
        for &r in rows {
            self.in_node[r] = false;
        }
        best.map(|(f, t, _, _)| (f, t))
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        let n: usize = counts.iter().sum();
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            class_counts: counts.clone(),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if pure || !depth_ok || n < self.params.min_samples_split {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&rows, &counts) else {
            return id;
        };
        let col = &self.x.cols[feature];
        let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| col[i] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// Grows a Gini tree on the rows with non-zero weight. `pick_features`
/// receives the feature count and returns the candidates for one node.
pub(crate) fn grow_classifier<F: FnMut(usize) -> Vec<usize>>(
    x: &FeatureMatrix,
    labels: &[usize],
    weights: &[usize],
    n_classes: usize,
    params: TreeParams,
    pick_features: F,
) -> TreeModel {
    let rows: Vec<usize> = (0..x.n_rows).filter(|&i| weights[i] > 0).collect();
    let mut g = ClassGrower {
        x,
        labels,
        weights,
        n_classes,
        params,
        pick_features,
        in_node: vec![false; x.n_rows],
        scratch: Vec::new(),
        nodes: Vec::new(),
    };
    g.grow(rows, 0);
    TreeModel {
        nodes: g.nodes,
        n_classes,
        n_features: x.n_features(),
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
    }
}

pub(crate) fn validate_labels(n_rows: usize, labels: &[usize], n_classes: usize) -> Result<()> {
    if labels.len() != n_rows {
        return Err(Error::LengthMismatch {
            left: n_rows,
            right: labels.len(),
        });
    }
    if n_rows == 0 {
        return Err(Error::Config("cannot fit on zero samples".into()));
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= n_classes) {
        return Err(Error::Config(format!("label {y} out of range")));
    }
    Ok(())
}

/// CART classification tree over every feature.
pub fn tree_fit(
    dtm: &DocumentTermMatrix,
    labels: &[usize],
    n_classes: usize,
    params: TreeParams,
) -> Result<TreeModel> {
    validate_labels(dtm.num_docs(), labels, n_classes)?;
    let x = FeatureMatrix::from_dtm(dtm);
    let weights = vec![1; x.n_rows];
    Ok(grow_classifier(
        &x,
        labels,
        &weights,
        n_classes,
        params,
        |v| (0..v).collect(),
    ))
}

struct RegGrower<'a> {
    x: &'a FeatureMatrix,
    targets: &'a [f64],
    max_depth: usize,
    min_samples_split: usize,
    in_node: Vec<bool>,
    scratch: Vec<usize>,
    nodes: Vec<RegressionNode>,
}

impl RegGrower<'_> {
    fn best_split(&mut self, rows: &[usize], total: f64) -> Option<(usize, f64)> {
        let n = rows.len();
        for &r in rows {
            self.in_node[r] = true;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        let mut sorted = std::mem::take(&mut self.scratch);
        for f in 0..self.x.n_features() {
            self.x.sorted_rows(f, rows, &self.in_node, &mut sorted);
            let col = &self.x.cols[f];
            let mut sum_left = 0.0;
            for k in 0..n - 1 {
                let r = sorted[k];
                sum_left += self.targets[r];
                let (v, next) = (col[r], col[sorted[k + 1]]);
                if v >= next {
                    continue;
                }
                let n_left = (k + 1) as f64;
                let n_right = (n - k - 1) as f64;
                let sum_right = total - sum_left;
                let score = sum_left * sum_left / n_left + sum_right * sum_right / n_right;
                if best.is_none_or(|(_, _, s)| score > s) {
                    best = Some((f, (v + next) / 2.0, score));
                }
            }
        }
        self.scratch = sorted;
        for &r in rows {
            self.in_node[r] = false;
        }
        best.map(|(f, t, _)| (f, t))
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let total: f64 = rows.iter().map(|&r| self.targets[r]).sum();
        let id = self.nodes.len();
        self.nodes.push(RegressionNode::Leaf {
            value: total / rows.len() as f64,
        });
        let first = self.targets[rows[0]];
        let constant = rows.iter().all(|&r| self.targets[r] == first);
        if constant || depth >= self.max_depth || rows.len() < self.min_samples_split {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&rows, total) else {
            return id;
        };
        let col = &self.x.cols[feature];
        let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| col[i] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = RegressionNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// Least-squares regression tree; leaves predict the mean target.
pub(crate) fn grow_regressor(
    x: &FeatureMatrix,
    targets: &[f64],
    max_depth: usize,
) -> RegressionTree {
    let mut g = RegGrower {
        x,
        targets,
        max_depth,
        min_samples_split: 2,
        in_node: vec![false; x.n_rows],
        scratch: Vec::new(),
        nodes: Vec::new(),
    };
    g.grow((0..x.n_rows).collect(), 0);
    RegressionTree { nodes: g.nodes }
}
