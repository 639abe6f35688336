//! Seeded synthetic corpora with class-separated token distributions and a
//! matching embedding table, for exercising the full pipeline end to end.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::RawDocument;
use crate::vectorize::EmbeddingTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_docs: usize,
    pub n_classes: usize,
    pub dim: usize,
    /// Distinct indicative tokens per class.
    pub tokens_per_class: usize,
    /// Distinct tokens shared by every class.
    pub noise_tokens: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Probability that a position holds a token of the document's class.
    pub class_token_rate: f64,
    /// Zipf exponent of within-pool token frequencies.
    pub zipf_exponent: f64,
    /// Norm of every class centroid; centroids are mutually orthogonal.
    pub centroid_norm: f64,
    /// Standard deviation of a class token around its class centroid.
    pub token_spread: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_docs: 600,
            n_classes: 3,
            dim: 20,
            tokens_per_class: 600,
            noise_tokens: 300,
            min_len: 10,
            max_len: 20,
            class_token_rate: 0.45,
            zipf_exponent: 0.9,
            centroid_norm: 8.0,
            token_spread: 0.5,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_docs == 0 || self.n_classes < 2 || self.dim == 0 {
            return Err(Error::Config(
                "synthetic corpus needs documents, at least 2 classes and a positive dimension"
                    .into(),
            ));
        }
        if self.tokens_per_class == 0 || self.noise_tokens == 0 {
            return Err(Error::Config("token pools must be non-empty".into()));
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(Error::Config("need 1 <= min_len <= max_len".into()));
        }
        if self.n_classes > self.dim {
            return Err(Error::Config(
                "orthogonal class centroids need dim >= n_classes".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.class_token_rate) {
            return Err(Error::Config("class_token_rate must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub documents: Vec<RawDocument>,
    pub embeddings: EmbeddingTable,
}

pub fn class_names(n_classes: usize) -> Vec<String> {
    match n_classes {
        3 => ["negative", "neutral", "positive"]
            .map(str::to_owned)
            .to_vec(),
        7 => [
            "angry", "apathy", "happy", "hopeful", "hopeless", "others", "sad",
        ]
        .map(str::to_owned)
        .to_vec(),
        n => (0..n).map(|i| format!("class{i:02}")).collect(),
    }
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Distinct pronounceable ASCII word for every id.
fn pseudo_word(mut id: usize) -> String {
    let base = CONSONANTS.len() * VOWELS.len();
    let mut out = String::new();
    for _ in 0..3 {
        let s = id % base;
        out.push(CONSONANTS[s / VOWELS.len()] as char);
        out.push(VOWELS[s % VOWELS.len()] as char);
        id /= base;
    }
    while id > 0 {
        out.push(VOWELS[id % VOWELS.len()] as char);
        id /= VOWELS.len();
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// `n` mutually orthogonal random vectors of the given norm (Gram-Schmidt
/// over Gaussian draws).
fn orthogonal_directions(rng: &mut ChaCha8Rng, n: usize, dim: usize, norm: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v = gaussian(rng, dim, 1.0);
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-6 {
            basis.push(v.into_iter().map(|x| x / len).collect());
        }
    }
    basis
        .into_iter()
        .map(|b| b.into_iter().map(|x| x * norm).collect())
        .collect()
}

/// Balanced labels (document i has class i mod C). Class tokens sit near
/// their class centroid in embedding space; noise tokens are drawn around
/// the origin and used by every class.
pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let names = class_names(spec.n_classes);
    let total_tokens = spec.n_classes * spec.tokens_per_class + spec.noise_tokens;
    let mut ids: Vec<usize> = (0..total_tokens).collect();
    ids.shuffle(&mut rng);
    let words: Vec<String> = ids.into_iter().map(pseudo_word).collect();

    let centroids = orthogonal_directions(&mut rng, spec.n_classes, spec.dim, spec.centroid_norm);
    let mut vectors = HashMap::with_capacity(total_tokens);
    for (k, word) in words.iter().enumerate() {
        let v = if k < spec.n_classes * spec.tokens_per_class {
            let c = k / spec.tokens_per_class;
            let jitter = gaussian(&mut rng, spec.dim, spec.token_spread);
            centroids[c]
                .iter()
                .zip(jitter)
                .map(|(m, j)| m + j)
                .collect()
        } else {
            gaussian(&mut rng, spec.dim, 1.0)
        };
        vectors.insert(word.clone(), v);
    }
    let embeddings = EmbeddingTable::new(spec.dim, vectors)?;

    let zipf = |n: usize| {
        WeightedIndex::new((0..n).map(|r| 1.0 / ((r + 1) as f64).powf(spec.zipf_exponent)))
            .expect("positive weights")
    };
    let class_pick = zipf(spec.tokens_per_class);
    let noise_pick = zipf(spec.noise_tokens);
    let noise_base = spec.n_classes * spec.tokens_per_class;

    let documents = (0..spec.n_docs)
        .map(|i| {
            let c = i % spec.n_classes;
            let len = rng.random_range(spec.min_len..=spec.max_len);
            let tokens: Vec<&str> = (0..len)
                .map(|_| {
                    let k = if rng.random_bool(spec.class_token_rate) {
                        c * spec.tokens_per_class + class_pick.sample(&mut rng)
                    } else {
                        noise_base + noise_pick.sample(&mut rng)
                    };
                    words[k].as_str()
                })
                .collect();
            RawDocument {
                text: tokens.join(" "),
                label: names[c].clone(),
            }
        })
        .collect();
    Ok(SynthCorpus {
        documents,
        embeddings,
    })
}
