//! Classical classifiers over bag-of-words count features.
//!
//! Every model predicts on a dense feature row and returns the chosen class
//! together with a probability (or vote) distribution. Ties always resolve to
//! the lowest class index.

mod boost;
mod forest;
mod gnb;
mod logreg;
mod tree;

use serde::{Deserialize, Serialize};

pub use boost::{gboost_fit, gboost_fit_traced, BoostModel, BoostParams};
pub use forest::{forest_fit, ForestModel, ForestParams};
pub use gnb::{gnb_fit, GnbModel};
pub use logreg::{logreg_fit, LogRegModel, LogRegParams};
pub use tree::{tree_fit, RegressionNode, RegressionTree, TreeModel, TreeNode, TreeParams};

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub trait Classifier {
    fn n_classes(&self) -> usize;

    /// `(class, distribution)` for one dense feature row.
    fn predict(&self, x: &[f64]) -> (usize, Vec<f64>);
}

/// Any fitted classical model, tagged by kind for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalModel {
    Gnb(GnbModel),
    Logreg(LogRegModel),
    Tree(TreeModel),
    Forest(ForestModel),
    Gboost(BoostModel),
}

impl Classifier for ClassicalModel {
    fn n_classes(&self) -> usize {
        match self {
            ClassicalModel::Gnb(m) => m.n_classes(),
            ClassicalModel::Logreg(m) => m.n_classes(),
            ClassicalModel::Tree(m) => m.n_classes(),
            ClassicalModel::Forest(m) => m.n_classes(),
            ClassicalModel::Gboost(m) => m.n_classes(),
        }
    }

    fn predict(&self, x: &[f64]) -> (usize, Vec<f64>) {
        match self {
            ClassicalModel::Gnb(m) => m.predict(x),
            ClassicalModel::Logreg(m) => m.predict(x),
            ClassicalModel::Tree(m) => m.predict(x),
            ClassicalModel::Forest(m) => m.predict(x),
            ClassicalModel::Gboost(m) => m.predict(x),
        }
    }
}
