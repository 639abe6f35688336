use serde::{Deserialize, Serialize};

use super::tree::{grow_regressor, validate_labels, FeatureMatrix};
use super::{argmax, softmax, Classifier, RegressionTree};
use crate::error::{Error, Result};
use crate::vectorize::DocumentTermMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_stages: 100,
            learning_rate: 0.1,
            max_depth: 3,
        }
    }
}

/// Multinomial gradient boosting with additive softmax scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    /// `stages[s][k]` is the regression tree for class `k` at stage `s`.
    pub stages: Vec<Vec<RegressionTree>>,
    pub learning_rate: f64,
    /// Log class priors.
    pub initial_scores: Vec<f64>,
}

/// Probabilities under this floor are treated as the floor when taking logs.
const PRIOR_FLOOR: f64 = 1e-12;

pub fn gboost_fit(
    dtm: &DocumentTermMatrix,
    labels: &[usize],
    n_classes: usize,
    params: BoostParams,
) -> Result<BoostModel> {
    gboost_fit_traced(dtm, labels, n_classes, params).map(|(m, _)| m)
}

/// Fits and also returns the mean training cross-entropy before the first
/// stage and after every stage (`n_stages + 1` values).
pub fn gboost_fit_traced(
    dtm: &DocumentTermMatrix,
    labels: &[usize],
    n_classes: usize,
    params: BoostParams,
) -> Result<(BoostModel, Vec<f64>)> {
    validate_labels(dtm.num_docs(), labels, n_classes)?;
    if params.n_stages == 0 {
        return Err(Error::Config("n_stages must be at least 1".into()));
    }
    if !(params.learning_rate >= 0.0) {
        return Err(Error::Config("learning rate must be non-negative".into()));
    }
    let x = FeatureMatrix::from_dtm(dtm);
    let n = x.n_rows;
    let mut counts = vec![0usize; n_classes];
    for &y in labels {
        counts[y] += 1;
    }
    let initial_scores: Vec<f64> = counts
        .iter()
        .map(|&c| (c as f64 / n as f64).max(PRIOR_FLOOR).ln())
        .collect();

    let mut scores: Vec<Vec<f64>> = vec![initial_scores.clone(); n];
    let mut trace = vec![mean_cross_entropy(&scores, labels)];
    let mut stages = Vec::with_capacity(params.n_stages);
    let mut residual = vec![0.0; n];
    for _ in 0..params.n_stages {
        let probs: Vec<Vec<f64>> = scores.iter().map(|s| softmax(s)).collect();
        let mut stage = Vec::with_capacity(n_classes);
        for k in 0..n_classes {
            for i in 0..n {
                let target = if labels[i] == k { 1.0 } else { 0.0 };
                residual[i] = target - probs[i][k];
            }
            stage.push(grow_regressor(&x, &residual, params.max_depth));
        }
        for (i, s) in scores.iter_mut().enumerate() {
            let row = x.row(i);
            for (k, tree) in stage.iter().enumerate() {
                s[k] += params.learning_rate * tree.predict(&row);
            }
        }
        trace.push(mean_cross_entropy(&scores, labels));
        stages.push(stage);
    }
    Ok((
        BoostModel {
            stages,
            learning_rate: params.learning_rate,
            initial_scores,
        },
        trace,
    ))
}

fn mean_cross_entropy(scores: &[Vec<f64>], labels: &[usize]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(s, &y)| -softmax(s)[y].max(PRIOR_FLOOR).ln())
        .sum();
    total / scores.len() as f64
}

impl BoostModel {
    /// Accumulated per-class scores before the softmax.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = self.initial_scores.clone();
        for stage in &self.stages {
            for (k, tree) in stage.iter().enumerate() {
                s[k] += self.learning_rate * tree.predict(x);
            }
        }
        s
    }
}

impl Classifier for BoostModel {
    fn n_classes(&self) -> usize {
        self.initial_scores.len()
    }

    fn predict(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let p = softmax(&self.scores(x));
        (argmax(&p), p)
    }
}
