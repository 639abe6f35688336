//! Versioned JSON container for fitted models together with everything
//! needed to featurize new text for them.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalModel, Classifier};
use crate::error::{Error, Result};
use crate::neural::{self, CnnLstmModel};
use crate::preprocess::TokenList;
use crate::vectorize::{bow_vector, densify, encode_sequences, EmbeddingTable, Vocabulary};

pub const BUNDLE_FORMAT: &str = "sentikit-model";
pub const BUNDLE_VERSION: u32 = 1;

/// The six model families, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Gnb,
    Tree,
    Gboost,
    Forest,
    Logreg,
    CnnLstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Gnb,
        ModelKind::Tree,
        ModelKind::Gboost,
        ModelKind::Forest,
        ModelKind::Logreg,
        ModelKind::CnnLstm,
    ];

    /// Short identifier used on the command line and in file names.
    pub fn id(self) -> &'static str {
        match self {
            ModelKind::Gnb => "gnb",
            ModelKind::Tree => "tree",
            ModelKind::Gboost => "gboost",
            ModelKind::Forest => "forest",
            ModelKind::Logreg => "logreg",
            ModelKind::CnnLstm => "cnn-lstm",
        }
    }

    /// Row label in reports.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Gnb => "Gaussian Naive Bayes",
            ModelKind::Tree => "Decision Tree",
            ModelKind::Gboost => "Gradient Boosting",
            ModelKind::Forest => "Random Forest",
            ModelKind::Logreg => "Logistic Regression",
            ModelKind::CnnLstm => "CNN-LSTM",
        }
    }

    pub fn is_neural(self) -> bool {
        self == ModelKind::CnnLstm
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Features {
    Bow { vocabulary: Vocabulary },
    Sequence { max_len: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainedModel {
    Classical(ClassicalModel),
    CnnLstm(Box<CnnLstmModel>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    pub class_names: Vec<String>,
    pub features: Features,
    pub model: TrainedModel,
}

impl ModelBundle {
    pub fn new(
        kind: ModelKind,
        class_names: Vec<String>,
        features: Features,
        model: TrainedModel,
    ) -> Self {
        ModelBundle {
            format: BUNDLE_FORMAT.to_owned(),
            version: BUNDLE_VERSION,
            kind,
            class_names,
            features,
            model,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn needs_embeddings(&self) -> bool {
        matches!(self.features, Features::Sequence { .. })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let header: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::ModelFormat(format!("not a JSON document: {e}")))?;
        if header.get("format").and_then(|v| v.as_str()) != Some(BUNDLE_FORMAT) {
            return Err(Error::ModelFormat(format!(
                "missing `{BUNDLE_FORMAT}` format tag"
            )));
        }
        match header.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(BUNDLE_VERSION) => {}
            Some(v) => {
                return Err(Error::ModelFormat(format!(
                    "unsupported version {v} (expected {BUNDLE_VERSION})"
                )))
            }
            None => return Err(Error::ModelFormat("missing version".into())),
        }
        let bundle: ModelBundle =
            serde_json::from_value(header).map_err(|e| Error::ModelFormat(e.to_string()))?;
        bundle.check()?;
        Ok(bundle)
    }

    fn check(&self) -> Result<()> {
        let model_classes = match &self.model {
            TrainedModel::Classical(m) => m.n_classes(),
            TrainedModel::CnnLstm(m) => {
                m.validate()
                    .map_err(|e| Error::ModelFormat(format!("invalid network: {e}")))?;
                m.n_classes()
            }
        };
        if model_classes != self.n_classes() {
            return Err(Error::ModelFormat(format!(
                "model predicts {model_classes} classes but bundle names {}",
                self.n_classes()
            )));
        }
        let consistent = match (&self.features, &self.model, self.kind) {
            (Features::Sequence { dim, .. }, TrainedModel::CnnLstm(m), ModelKind::CnnLstm) => {
                m.conv.input_dim == *dim
            }
            (Features::Bow { .. }, TrainedModel::Classical(_), k) => !k.is_neural(),
            _ => false,
        };
        if !consistent {
            return Err(Error::ModelFormat(
                "feature description does not match the model".into(),
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Class and distribution per document. Sequence models need the
    /// embedding table they were trained with.
    pub fn predict(
        &self,
        docs: &[TokenList],
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
        match (&self.features, &self.model) {
            (Features::Bow { vocabulary }, TrainedModel::Classical(model)) => {
                let mut classes = Vec::with_capacity(docs.len());
                let mut dists = Vec::with_capacity(docs.len());
                for doc in docs {
                    let x = densify(&bow_vector(doc, vocabulary), vocabulary.len());
                    let (c, p) = model.predict(&x);
                    classes.push(c);
                    dists.push(p);
                }
                Ok((classes, dists))
            }
            (Features::Sequence { max_len, dim }, TrainedModel::CnnLstm(model)) => {
                let table = embeddings.ok_or_else(|| {
                    Error::Config("the CNN-LSTM model needs an embedding table".into())
                })?;
                if table.dim() != *dim {
                    return Err(Error::Config(format!(
                        "embedding dimension {} does not match the model's {dim}",
                        table.dim()
                    )));
                }
                let labels = vec![0; docs.len()];
                let batch = encode_sequences(docs, &labels, table, *max_len)?;
                neural::predict(model, &batch)
            }
            _ => Err(Error::ModelFormat(
                "feature description does not match the model".into(),
            )),
        }
    }
}
