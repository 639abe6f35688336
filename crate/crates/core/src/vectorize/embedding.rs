use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::preprocess::TokenList;

/// Frozen token embeddings read from a word2vec text file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    unknown_vector: Vec<f64>,
    pad_vector: Vec<f64>,
}

impl EmbeddingTable {
    /// Builds a table in memory; the unknown vector is the mean of all rows.
    pub fn new(dim: usize, vectors: HashMap<String, Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut mean = vec![0.0; dim];
        // Sorted so the mean is reproducible bit-for-bit.
        let mut keys: Vec<&String> = vectors.keys().collect();
        keys.sort();
        for key in &keys {
            let v = &vectors[*key];
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    path: format!("<token {key}>"),
                    line: 0,
                    expected: dim,
                    found: v.len(),
                });
            }
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        if !keys.is_empty() {
            let n = keys.len() as f64;
            mean.iter_mut().for_each(|m| *m /= n);
        }
        Ok(EmbeddingTable {
            dim,
            vectors,
            unknown_vector: mean,
            pad_vector: vec![0.0; dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Table row, or the unknown vector for out-of-vocabulary tokens.
    pub fn lookup(&self, token: &str) -> &[f64] {
        self.get(token).unwrap_or(&self.unknown_vector)
    }

    pub fn unknown_vector(&self) -> &[f64] {
        &self.unknown_vector
    }

    pub fn pad_vector(&self) -> &[f64] {
        &self.pad_vector
    }

    /// Serializes in word2vec text format, tokens sorted.
    pub fn to_word2vec_text(&self) -> String {
        let mut keys: Vec<&String> = self.vectors.keys().collect();
        keys.sort();
        let mut out = format!("{} {}\n", keys.len(), self.dim);
        for key in keys {
            out.push_str(key);
            for x in &self.vectors[key] {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }
}

/// Reads `<count> <dim>` followed by `<token> <f1> ... <f_dim>` rows.
/// Duplicate tokens keep their first row.
pub fn load_embedding_table(path: &Path) -> Result<EmbeddingTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut lines = text
        .trim_start_matches('\u{FEFF}')
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::format(&name, 1, "missing `<count> <dim>` header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match fields.as_slice() {
        [c, d] => match (c.parse::<usize>(), d.parse::<usize>()) {
            (Ok(c), Ok(d)) if d > 0 => (c, d),
            _ => return Err(Error::format(&name, 1, "header must be `<count> <dim>`")),
        },
        _ => return Err(Error::format(&name, 1, "header must be `<count> <dim>`")),
    };

    let mut vectors = HashMap::with_capacity(count);
    let mut rows = 0usize;
    for (line_no, line) in lines {
        let mut parts = line.split(' ').filter(|s| !s.is_empty());
        let token = parts
            .next()
            .ok_or_else(|| Error::format(&name, line_no, "empty row"))?;
        let values = parts
            .map(|p| {
                p.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::format(&name, line_no, format!("`{p}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                path: name,
                line: line_no,
                expected: dim,
                found: values.len(),
            });
        }
        rows += 1;
        vectors.entry(token.to_owned()).or_insert(values);
    }
    if rows != count {
        return Err(Error::format(
            &name,
            1,
            format!("header declares {count} rows, file has {rows}"),
        ));
    }
    EmbeddingTable::new(dim, vectors)
}

/// Embedded, padded documents: `data` is `[batch, max_len, dim]` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBatch {
    pub data: Vec<f64>,
    pub lengths: Vec<usize>,
    pub labels: Vec<usize>,
    pub max_len: usize,
    pub dim: usize,
}

impl SequenceBatch {
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// `[max_len × dim]` block of item `i`.
    pub fn item(&self, i: usize) -> &[f64] {
        let stride = self.max_len * self.dim;
        &self.data[i * stride..(i + 1) * stride]
    }

    /// Items at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> SequenceBatch {
        let mut data = Vec::with_capacity(indices.len() * self.max_len * self.dim);
        for &i in indices {
            data.extend_from_slice(self.item(i));
        }
        SequenceBatch {
            data,
            lengths: indices.iter().map(|&i| self.lengths[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            max_len: self.max_len,
            dim: self.dim,
        }
    }
}

/// Truncates each document to `max_len` tokens, looks tokens up, and
/// right-pads with the zero vector.
pub fn encode_sequences(
    docs: &[TokenList],
    labels: &[usize],
    table: &EmbeddingTable,
    max_len: usize,
) -> Result<SequenceBatch> {
    if max_len == 0 {
        return Err(Error::Config("max_len must be at least 1".into()));
    }
    if docs.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: docs.len(),
            right: labels.len(),
        });
    }
    let dim = table.dim();
    let mut data = Vec::with_capacity(docs.len() * max_len * dim);
    let mut lengths = Vec::with_capacity(docs.len());
    for doc in docs {
        let len = doc.len().min(max_len);
        for tok in doc.iter().take(len) {
            data.extend_from_slice(table.lookup(tok));
        }
        for _ in len..max_len {
            data.extend_from_slice(table.pad_vector());
        }
        lengths.push(len);
    }
    Ok(SequenceBatch {
        data,
        lengths,
        labels: labels.to_vec(),
        max_len,
        dim,
    })
}
