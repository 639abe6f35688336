use serde::{Deserialize, Serialize};

use super::tree::validate_labels;
use super::{argmax, softmax, Classifier};
use crate::error::{Error, Result};
use crate::vectorize::DocumentTermMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            learning_rate: 0.1,
            epochs: 500,
            l2: 0.0,
        }
    }
}

/// Multinomial (softmax) logistic regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    /// `[classes][features]`
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub hyper: LogRegParams,
}

/// Full-batch gradient descent on mean cross-entropy plus `l2/2 · ‖W‖²`,
/// starting from zero weights.
pub fn logreg_fit(
    dtm: &DocumentTermMatrix,
    labels: &[usize],
    n_classes: usize,
    hyper: LogRegParams,
) -> Result<LogRegModel> {
    validate_labels(dtm.num_docs(), labels, n_classes)?;
    if n_classes < 2 {
        return Err(Error::Config(
            "logistic regression needs at least 2 classes".into(),
        ));
    }
    let n = dtm.num_docs();
    let v = dtm.num_terms();
    let mut model = LogRegModel {
        weights: vec![vec![0.0; v]; n_classes],
        biases: vec![0.0; n_classes],
        hyper,
    };
    let inv_n = 1.0 / n as f64;
    for _ in 0..hyper.epochs {
        let mut grad_w = vec![vec![0.0; v]; n_classes];
        let mut grad_b = vec![0.0; n_classes];
        for (i, &y) in labels.iter().enumerate() {
            let row = dtm.row(i);
            let p = softmax(&model.scores_sparse(row));
            for k in 0..n_classes {
                let err = p[k] - if k == y { 1.0 } else { 0.0 };
                grad_b[k] += err;
                for &(j, c) in row {
                    grad_w[k][j] += err * f64::from(c);
                }
            }
        }
        for k in 0..n_classes {
            for j in 0..v {
                let g = grad_w[k][j] * inv_n + hyper.l2 * model.weights[k][j];
                model.weights[k][j] -= hyper.learning_rate * g;
            }
            model.biases[k] -= hyper.learning_rate * grad_b[k] * inv_n;
        }
    }
    if model
        .weights
        .iter()
        .flatten()
        .chain(&model.biases)
        .any(|w| !w.is_finite())
    {
        return Err(Error::Numeric("logistic regression diverged".into()));
    }
    Ok(model)
}

impl LogRegModel {
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| b + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    fn scores_sparse(&self, row: &[(usize, u32)]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| b + row.iter().map(|&(j, c)| w[j] * f64::from(c)).sum::<f64>())
            .collect()
    }
}

impl Classifier for LogRegModel {
    fn n_classes(&self) -> usize {
        self.biases.len()
    }

    fn predict(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let p = softmax(&self.scores(x));
        (argmax(&p), p)
    }
}
