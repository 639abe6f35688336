use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_classifier, validate_labels, FeatureMatrix};
use super::{argmax, Classifier, TreeModel, TreeParams};
use crate::error::{Error, Result};
use crate::vectorize::DocumentTermMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per node; `None` means `ceil(sqrt(V))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
            tree: TreeParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub features_per_split: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

/// Per-tree generator: stream `tree_index` of the seeded ChaCha8 family, so
/// trees can be grown in any order.
fn tree_rng(seed: u64, tree_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree_index as u64);
    rng
}

pub fn forest_fit(
    dtm: &DocumentTermMatrix,
    labels: &[usize],
    n_classes: usize,
    params: ForestParams,
) -> Result<ForestModel> {
    validate_labels(dtm.num_docs(), labels, n_classes)?;
    if params.n_trees == 0 {
        return Err(Error::Config("n_trees must be at least 1".into()));
    }
    let x = FeatureMatrix::from_dtm(dtm);
    let v = x.n_features();
    let k = params
        .features_per_split
        .unwrap_or_else(|| (v as f64).sqrt().ceil() as usize)
        .clamp(1, v.max(1));
    let n = x.n_rows;

    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(params.seed, t);
            let mut weights = vec![0usize; n];
            if params.bootstrap {
                for _ in 0..n {
                    weights[rng.random_range(0..n)] += 1;
                }
            } else {
                weights.fill(1);
            }
            grow_classifier(&x, labels, &weights, n_classes, params.tree, |v| {
                if k >= v {
                    (0..v).collect()
                } else {
                    sample(&mut rng, v, k).into_vec()
                }
            })
        })
        .collect();

    Ok(ForestModel {
        trees,
        features_per_split: k,
        bootstrap: params.bootstrap,
        seed: params.seed,
    })
}

impl ForestModel {
    /// Hard vote count per class.
    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut votes = vec![0; self.n_classes()];
        for tree in &self.trees {
            votes[tree.predict(x).0] += 1;
        }
        votes
    }
}

impl Classifier for ForestModel {
    fn n_classes(&self) -> usize {
        self.trees[0].n_classes
    }

    fn predict(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let votes = self.votes(x);
        let n = self.trees.len() as f64;
        let dist: Vec<f64> = votes.iter().map(|&v| v as f64 / n).collect();
        (argmax(&dist), dist)
    }
}
