use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{argmax, Classifier};
use crate::error::{Error, Result};
use crate::vectorize::DocumentTermMatrix;

/// Gaussian naive Bayes: per-class priors, feature means and variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub class_priors: Vec<f64>,
    /// `[classes][features]`
    pub means: Vec<Vec<f64>>,
    /// `[classes][features]`, smoothing already added
    pub variances: Vec<Vec<f64>>,
    /// Absolute variance added to every entry.
    pub epsilon: f64,
}

/// Maximum-likelihood fit. `var_smoothing` is relative to the largest
/// feature variance; the absolute epsilon falls back to `var_smoothing`
/// itself when every feature is constant.
pub fn gnb_fit(
    dtm: &DocumentTermMatrix,
    labels: &[usize],
    n_classes: usize,
    var_smoothing: f64,
) -> Result<GnbModel> {
    let n = dtm.num_docs();
    let v = dtm.num_terms();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: labels.len(),
        });
    }
    if !(var_smoothing > 0.0) {
        return Err(Error::Config("var_smoothing must be positive".into()));
    }
    let mut counts = vec![0usize; n_classes];
    let mut sums = vec![vec![0.0; v]; n_classes];
    for (i, &y) in labels.iter().enumerate() {
        if y >= n_classes {
            return Err(Error::Config(format!("label {y} out of range")));
        }
        counts[y] += 1;
        for &(j, c) in dtm.row(i) {
            sums[y][j] += f64::from(c);
        }
    }
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::DegenerateClass(c));
    }

    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s.iter().map(|x| x / c as f64).collect())
        .collect();

    let dense = dtm.to_dense();
    let mut sq = vec![vec![0.0; v]; n_classes];
    for (row, &y) in dense.iter().zip(labels) {
        for (j, x) in row.iter().enumerate() {
            let d = x - means[y][j];
            sq[y][j] += d * d;
        }
    }

    // Largest per-feature variance over the whole training set.
    let mut max_var = 0.0f64;
    for j in 0..v {
        let mean = dense.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = dense
            .iter()
            .map(|r| (r[j] - mean) * (r[j] - mean))
            .sum::<f64>()
            / n as f64;
        max_var = max_var.max(var);
    }
    let epsilon = if max_var > 0.0 {
        var_smoothing * max_var
    } else {
        var_smoothing
    };

    let variances = sq
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s.iter().map(|x| x / c as f64 + epsilon).collect())
        .collect();
    let class_priors = counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(GnbModel {
        class_priors,
        means,
        variances,
        epsilon,
    })
}

fn log_density(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * PI * var).ln() - (x - mean) * (x - mean) / (2.0 * var)
}

fn normalize_log(joint: &[f64]) -> Vec<f64> {
    let max = joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = joint.iter().map(|j| (j - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl GnbModel {
    pub fn n_features(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// Unnormalized log posterior `ln P(A) + Σ ln p(x_i | A)` per class.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        (0..self.class_priors.len())
            .map(|c| {
                let mut s = self.class_priors[c].ln();
                for (j, &xj) in x.iter().enumerate() {
                    s += log_density(xj, self.means[c][j], self.variances[c][j]);
                }
                s
            })
            .collect()
    }

    /// Same posterior as [`Classifier::predict`], computed from a sparse row
    /// by correcting an all-zeros baseline at the non-zero entries.
    pub fn predict_sparse(&self, row: &[(usize, u32)]) -> (usize, Vec<f64>) {
        let joint: Vec<f64> = (0..self.class_priors.len())
            .map(|c| {
                let mut s = self.class_priors[c].ln();
                for j in 0..self.n_features() {
                    s += log_density(0.0, self.means[c][j], self.variances[c][j]);
                }
                for &(j, cnt) in row {
                    let x = f64::from(cnt);
                    s += log_density(x, self.means[c][j], self.variances[c][j])
                        - log_density(0.0, self.means[c][j], self.variances[c][j]);
                }
                s
            })
            .collect();
        (argmax(&joint), normalize_log(&joint))
    }
}

impl Classifier for GnbModel {
    fn n_classes(&self) -> usize {
        self.class_priors.len()
    }

    fn predict(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let joint = self.joint_log_likelihood(x);
        (argmax(&joint), normalize_log(&joint))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dtm(rows: &[&[f64]]) -> DocumentTermMatrix {
        DocumentTermMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn ml_estimates() {
        let m = gnb_fit(&dtm(&[&[1.0], &[3.0]]), &[0, 0], 1, 1e-9).unwrap();
        assert_eq!(m.means[0][0], 2.0);
        assert!((m.variances[0][0] - 1.0).abs() < 1e-8);
        assert!(m.variances[0][0] > 1.0);
        assert_eq!(m.class_priors, vec![1.0]);
    }

    #[test]
    fn equal_priors() {
        let m = gnb_fit(
            &dtm(&[&[1.0], &[3.0], &[2.0], &[5.0]]),
            &[0, 1, 0, 1],
            2,
            1e-9,
        )
        .unwrap();
        assert_eq!(m.class_priors, vec![0.5, 0.5]);
        let sum: f64 = m.class_priors.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn absent_class_is_degenerate() {
        let err = gnb_fit(&dtm(&[&[1.0], &[3.0]]), &[0, 0], 3, 1e-9);
        assert!(matches!(err, Err(Error::DegenerateClass(1))));
    }

    #[test]
    fn constant_features_still_smoothed() {
        let m = gnb_fit(&dtm(&[&[2.0], &[2.0]]), &[0, 1], 2, 1e-9).unwrap();
        assert!(m
            .variances
            .iter()
            .flatten()
            .all(|&v| v >= m.epsilon && v > 0.0));
    }

    #[test]
    fn symmetric_tie_goes_to_class_zero() {
        let m = GnbModel {
            class_priors: vec![0.5, 0.5],
            means: vec![vec![-1.0], vec![1.0]],
            variances: vec![vec![1.0], vec![1.0]],
            epsilon: 1e-9,
        };
        let (class, post) = m.predict(&[0.0]);
        assert_eq!(class, 0);
        assert_eq!(post, vec![0.5, 0.5]);
        let (class, _) = m.predict(&[1.0]);
        assert_eq!(class, 1);
        let (class, _) = m.predict(&[-1.0]);
        assert_eq!(class, 0);
    }

    #[test]
    fn sparse_and_dense_agree() {
        let rows: Vec<Vec<f64>> = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 0.0],
            vec![3.0, 0.0, 1.0],
            vec![0.0, 2.0, 0.0],
        ];
        let d = DocumentTermMatrix::from_dense(&rows).unwrap();
        let m = gnb_fit(&d, &[0, 1, 1, 0], 2, 1e-9).unwrap();
        for i in 0..d.num_docs() {
            let (a, pa) = m.predict(&d.dense_row(i));
            let (b, pb) = m.predict_sparse(d.row(i));
            assert_eq!(a, b);
            for (x, y) in pa.iter().zip(&pb) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
