//! Numeric features: bag-of-words counts for the classical models and
//! padded embedding sequences for the neural model.

mod embedding;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::TokenList;

pub use embedding::{encode_sequences, load_embedding_table, EmbeddingTable, SequenceBatch};

/// Term index assignment fitted on a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    term_to_index: HashMap<String, usize>,
    index_to_term: Vec<String>,
    min_count: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    min_count: usize,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::from_terms(r.terms, r.min_count)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            terms: v.index_to_term,
            min_count: v.min_count,
        }
    }
}

impl Vocabulary {
    fn from_terms(terms: Vec<String>, min_count: usize) -> Self {
        let term_to_index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            term_to_index,
            index_to_term: terms,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.index_to_term.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_to_term.is_empty()
    }

    pub fn index(&self, term: &str) -> Option<usize> {
        self.term_to_index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.index_to_term.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.index_to_term
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }
}

/// Keeps every token seen at least `min_count` times. Indices go by
/// descending frequency, ties broken lexicographically.
pub fn build_vocabulary(corpus: &[TokenList], min_count: usize) -> Result<Vocabulary> {
    let min_count = min_count.max(1);
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        for tok in doc {
            *freq.entry(tok.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = freq.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_count });
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(Vocabulary::from_terms(
        kept.into_iter().map(|(t, _)| t.to_owned()).collect(),
        min_count,
    ))
}

/// Sparse count vector: `(term_index, count)` pairs sorted by index, counts ≥ 1.
pub type SparseCounts = Vec<(usize, u32)>;

/// Raw term counts of the in-vocabulary tokens; out-of-vocabulary tokens are ignored.
pub fn bow_vector(tokens: &TokenList, vocab: &Vocabulary) -> SparseCounts {
    let mut counts: Vec<(usize, u32)> = Vec::new();
    let mut indices: Vec<usize> = tokens.iter().filter_map(|t| vocab.index(t)).collect();
    indices.sort_unstable();
    for idx in indices {
        match counts.last_mut() {
            Some((last, c)) if *last == idx => *c += 1,
            _ => counts.push((idx, 1)),
        }
    }
    counts
}

/// Per-document sparse term counts over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentTermMatrix {
    rows: Vec<SparseCounts>,
    num_terms: usize,
}

impl DocumentTermMatrix {
    pub fn from_rows(rows: Vec<SparseCounts>, num_terms: usize) -> Result<Self> {
        for row in &rows {
            for w in row.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(Error::Config(
                        "sparse row indices must be increasing".into(),
                    ));
                }
            }
            if row.iter().any(|&(i, c)| i >= num_terms || c == 0) {
                return Err(Error::Config(
                    "sparse row entry out of range or zero".into(),
                ));
            }
        }
        Ok(DocumentTermMatrix { rows, num_terms })
    }

    /// Builds a matrix from dense non-negative integer rows (used for fixtures).
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let num_terms = rows.first().map_or(0, Vec::len);
        let mut sparse = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != num_terms {
                return Err(Error::Config("ragged dense rows".into()));
            }
            let mut r = Vec::new();
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::Config(format!("{v} is not a count")));
                }
                if v > 0.0 {
                    r.push((j, v as u32));
                }
            }
            sparse.push(r);
        }
        Ok(DocumentTermMatrix {
            rows: sparse,
            num_terms,
        })
    }

    pub fn num_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn num_terms(&self) -> usize {
        self.num_terms
    }

    pub fn row(&self, i: usize) -> &[(usize, u32)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[SparseCounts] {
        &self.rows
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        densify(&self.rows[i], self.num_terms)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.rows.len()).map(|i| self.dense_row(i)).collect()
    }

    /// Rows restricted to `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> DocumentTermMatrix {
        DocumentTermMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            num_terms: self.num_terms,
        }
    }
}

pub fn densify(row: &[(usize, u32)], num_terms: usize) -> Vec<f64> {
    let mut dense = vec![0.0; num_terms];
    for &(i, c) in row {
        dense[i] = f64::from(c);
    }
    dense
}

pub fn build_dtm(corpus: &[TokenList], vocab: &Vocabulary) -> DocumentTermMatrix {
    DocumentTermMatrix {
        rows: corpus.iter().map(|doc| bow_vector(doc, vocab)).collect(),
        num_terms: vocab.len(),
    }
}
