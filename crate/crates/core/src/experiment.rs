//! End-to-end runs: load and preprocess a dataset, split it, fit the selected
//! models, evaluate them on the held-out part and render the report.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::classical::{
    forest_fit, gboost_fit, gnb_fit, logreg_fit, tree_fit, BoostParams, ClassicalModel,
    ForestParams, LogRegParams, TreeParams,
};
use crate::dataset::{load_dataset, LabeledDataset};
use crate::error::{Error, Result};
use crate::eval::{evaluate, render_report, MetricsReport, ReportFormat};
use crate::neural::{self, Architecture, CnnLstmModel, Optimizer, TrainConfig};
use crate::persist::{Features, ModelBundle, ModelKind, TrainedModel};
use crate::preprocess::{preprocess_text, PreprocessConfig, ResourcePaths, Step, TokenList};
use crate::search::{
    carve_validation, greedy_search, split, Axis, GridPoint, SearchGrid, SearchOutcome, SplitSpec,
};
use crate::synth::SynthSpec;
use crate::vectorize::{
    build_dtm, build_vocabulary, encode_sequences, load_embedding_table, EmbeddingTable,
};

/// Which models a run fits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ModelSelector {
    One(ModelKind),
    #[default]
    All,
}

impl ModelSelector {
    pub fn kinds(self) -> Vec<ModelKind> {
        match self {
            ModelSelector::One(k) => vec![k],
            ModelSelector::All => ModelKind::ALL.to_vec(),
        }
    }
}

impl FromStr for ModelSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            Ok(ModelSelector::All)
        } else {
            s.parse().map(ModelSelector::One).map_err(|_| {
                Error::Config(format!(
                    "unknown model selector `{s}` (expected gnb, logreg, tree, forest, gboost, cnn-lstm or all)"
                ))
            })
        }
    }
}

impl fmt::Display for ModelSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSelector::One(k) => write!(f, "{k}"),
            ModelSelector::All => f.write_str("all"),
        }
    }
}

impl<'de> Deserialize<'de> for ModelSelector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for ModelSelector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub steps: Vec<Step>,
    pub stopwords: Option<PathBuf>,
    pub emoji_map: Option<PathBuf>,
    pub stem_rules: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection {
            steps: Step::ALL.to_vec(),
            stopwords: None,
            emoji_map: None,
            stem_rules: None,
            dictionary: None,
        }
    }
}

impl PreprocessSection {
    pub fn resource_paths(&self) -> ResourcePaths {
        ResourcePaths {
            stopwords: self.stopwords.clone(),
            emoji_map: self.emoji_map.clone(),
            stem_rules: self.stem_rules.clone(),
            dictionary: self.dictionary.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VectorizeSection {
    pub min_count: usize,
    pub max_len: usize,
}

impl Default for VectorizeSection {
    fn default() -> Self {
        VectorizeSection {
            min_count: 1,
            max_len: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GnbSection {
    pub var_smoothing: f64,
}

impl Default for GnbSection {
    fn default() -> Self {
        GnbSection {
            var_smoothing: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSection {
    pub n_trees: usize,
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestSection {
    fn default() -> Self {
        let p = ForestParams::default();
        ForestSection {
            n_trees: p.n_trees,
            features_per_split: p.features_per_split,
            bootstrap: p.bootstrap,
            max_depth: p.tree.max_depth,
            min_samples_split: p.tree.min_samples_split,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnnLstmSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub filters: usize,
    pub kernel_width: usize,
    pub pool_size: usize,
    pub hidden: usize,
    pub dropout: f64,
}

impl Default for CnnLstmSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        let a = Architecture::new(1, 2);
        CnnLstmSection {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            optimizer: t.optimizer,
            filters: a.filters,
            kernel_width: a.kernel_width,
            pool_size: a.pool_size,
            hidden: a.hidden,
            dropout: a.dropout_rate,
        }
    }
}

impl CnnLstmSection {
    pub fn architecture(&self, input_dim: usize, n_classes: usize) -> Architecture {
        Architecture {
            input_dim,
            n_classes,
            filters: self.filters,
            kernel_width: self.kernel_width,
            pool_size: self.pool_size,
            hidden: self.hidden,
            dropout_rate: self.dropout,
        }
    }

    pub fn grid_point(&self) -> GridPoint {
        GridPoint {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            loss: neural::Loss::CategoricalCrossEntropy,
            optimizer: self.optimizer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub validation_fraction: f64,
    pub axis_order: Vec<Axis>,
    pub grid: SearchGrid,
}

impl Default for SearchSection {
    fn default() -> Self {
        SearchSection {
            validation_fraction: 0.1,
            axis_order: Axis::DEFAULT_ORDER.to_vec(),
            grid: SearchGrid::default(),
        }
    }
}

/// Everything a run needs. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    #[serde(default)]
    pub model: ModelSelector,
    #[serde(default)]
    pub embedding: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_true")]
    pub stratified: bool,
    #[serde(default)]
    pub report: ReportFormat,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub vectorize: VectorizeSection,
    #[serde(default)]
    pub gnb: GnbSection,
    #[serde(default)]
    pub logreg: LogRegParams,
    #[serde(default)]
    pub tree: TreeParams,
    #[serde(default)]
    pub forest: ForestSection,
    #[serde(default)]
    pub gboost: BoostParams,
    #[serde(default)]
    pub cnn_lstm: CnnLstmSection,
    #[serde(default)]
    pub search: SearchSection,
}

fn default_train_fraction() -> f64 {
    0.7
}

fn default_true() -> bool {
    true
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ExperimentConfig {
    /// Defaults for everything except the dataset.
    pub fn new(dataset: PathBuf) -> Self {
        ExperimentConfig {
            dataset,
            model: ModelSelector::All,
            embedding: None,
            seed: 0,
            train_fraction: default_train_fraction(),
            stratified: true,
            report: ReportFormat::Tsv,
            preprocess: PreprocessSection::default(),
            vectorize: VectorizeSection::default(),
            gnb: GnbSection::default(),
            logreg: LogRegParams::default(),
            tree: TreeParams::default(),
            forest: ForestSection::default(),
            gboost: BoostParams::default(),
            cnn_lstm: CnnLstmSection::default(),
            search: SearchSection::default(),
        }
    }

    /// Settings sized for a corpus from [`crate::synth::generate`]: every
    /// model, sequences as long as the longest document, and a CNN-LSTM
    /// schedule (10 epochs, batch 16, Adam at 0.002) that converges on a few
    /// hundred documents.
    pub fn for_synthetic(dataset: PathBuf, embedding: PathBuf, spec: &SynthSpec) -> Self {
        let mut cfg = ExperimentConfig::new(dataset);
        cfg.embedding = Some(embedding);
        cfg.seed = spec.seed;
        cfg.vectorize.max_len = spec.max_len;
        cfg.cnn_lstm.epochs = 10;
        cfg.cnn_lstm.batch_size = 16;
        cfg.cnn_lstm.learning_rate = 0.002;
        cfg
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.resolve_paths(base_dir);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.dataset);
        if let Some(p) = &mut self.embedding {
            resolve(base, p);
        }
        let pre = &mut self.preprocess;
        for p in [
            &mut pre.stopwords,
            &mut pre.emoji_map,
            &mut pre.stem_rules,
            &mut pre.dictionary,
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, p);
        }
    }

    /// Cheap checks run before any data is touched.
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(
                "train_fraction must lie strictly between 0 and 1".into(),
            ));
        }
        if self.vectorize.min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        if self.needs_embeddings() && self.embedding.is_none() {
            return Err(Error::Config(
                "the cnn-lstm model requires an `embedding` path".into(),
            ));
        }
        if self.needs_embeddings() {
            let arch = self.cnn_lstm.architecture(1, 2);
            arch.validate()?;
            if self.vectorize.max_len < arch.min_sequence_len() {
                return Err(Error::SequenceTooShort {
                    len: self.vectorize.max_len,
                    required: arch.min_sequence_len(),
                });
            }
        }
        let mut files = vec![("dataset", &self.dataset)];
        if let Some(p) = &self.embedding {
            files.push(("embedding", p));
        }
        let pre = &self.preprocess;
        for (name, p) in [
            ("stopwords", &pre.stopwords),
            ("emoji_map", &pre.emoji_map),
            ("stem_rules", &pre.stem_rules),
            ("dictionary", &pre.dictionary),
        ] {
            if let Some(p) = p {
                files.push((name, p));
            }
        }
        for (name, p) in files {
            if !p.is_file() {
                return Err(Error::Config(format!(
                    "{name} file {} not found",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    pub fn needs_embeddings(&self) -> bool {
        self.model.kinds().iter().any(|k| k.is_neural())
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            stratified: self.stratified,
            seed: derive_seed(self.seed, 0),
        }
    }

    pub fn preprocess_config(&self) -> Result<PreprocessConfig> {
        PreprocessConfig::load(
            &self.preprocess.resource_paths(),
            self.preprocess.steps.clone(),
        )
    }

    fn forest_params(&self) -> ForestParams {
        ForestParams {
            n_trees: self.forest.n_trees,
            features_per_split: self.forest.features_per_split,
            bootstrap: self.forest.bootstrap,
            seed: derive_seed(self.seed, 1),
            tree: TreeParams {
                max_depth: self.forest.max_depth,
                min_samples_split: self.forest.min_samples_split,
            },
        }
    }
}

/// Independent per-purpose seeds from one run seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, purpose: u64) -> u64 {
    let mut z = seed.wrapping_add(purpose.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Preprocessed dataset with its seeded train/test partition.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub dataset: LabeledDataset,
    pub tokens: Vec<TokenList>,
    pub labels: Vec<usize>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl PreparedData {
    pub fn class_names(&self) -> &[String] {
        &self.dataset.class_names
    }

    pub fn subset(&self, indices: &[usize]) -> (Vec<TokenList>, Vec<usize>) {
        (
            indices.iter().map(|&i| self.tokens[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

pub fn preprocess_all(texts: &[&str], cfg: &PreprocessConfig) -> Vec<TokenList> {
    texts.par_iter().map(|t| preprocess_text(t, cfg)).collect()
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let pre = cfg.preprocess_config()?;
    let dataset = load_dataset(&cfg.dataset)?;
    let texts: Vec<&str> = dataset.documents.iter().map(|d| d.text.as_str()).collect();
    let tokens = preprocess_all(&texts, &pre);
    let labels = dataset.labels();
    let (train, test) = split(&labels, dataset.n_classes(), &cfg.split_spec())?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} documents are too few for a {}/{} split",
            labels.len(),
            train.len(),
            test.len()
        )));
    }
    Ok(PreparedData {
        dataset,
        tokens,
        labels,
        train,
        test,
    })
}

fn load_embeddings(cfg: &ExperimentConfig) -> Result<Option<EmbeddingTable>> {
    match (&cfg.embedding, cfg.needs_embeddings()) {
        (Some(p), true) => load_embedding_table(p).map(Some),
        _ => Ok(None),
    }
}

/// Fits one model on the given training documents.
pub fn fit_model(
    kind: ModelKind,
    cfg: &ExperimentConfig,
    tokens: &[TokenList],
    labels: &[usize],
    class_names: &[String],
    embeddings: Option<&EmbeddingTable>,
) -> Result<ModelBundle> {
    let n_classes = class_names.len();
    if kind.is_neural() {
        let table = embeddings.ok_or_else(|| {
            Error::Config("the cnn-lstm model requires an embedding table".into())
        })?;
        let train_cfg = cfg
            .cnn_lstm
            .grid_point()
            .train_config(derive_seed(cfg.seed, 3));
        let model = fit_cnn_lstm(cfg, tokens, labels, n_classes, table, &train_cfg)?;
        return Ok(ModelBundle::new(
            kind,
            class_names.to_vec(),
            Features::Sequence {
                max_len: cfg.vectorize.max_len,
                dim: table.dim(),
            },
            TrainedModel::CnnLstm(Box::new(model)),
        ));
    }
    let vocabulary = build_vocabulary(tokens, cfg.vectorize.min_count)?;
    let dtm = build_dtm(tokens, &vocabulary);
    let model = match kind {
        ModelKind::Gnb => {
            ClassicalModel::Gnb(gnb_fit(&dtm, labels, n_classes, cfg.gnb.var_smoothing)?)
        }
        ModelKind::Logreg => {
            ClassicalModel::Logreg(logreg_fit(&dtm, labels, n_classes, cfg.logreg)?)
        }
        ModelKind::Tree => ClassicalModel::Tree(tree_fit(&dtm, labels, n_classes, cfg.tree)?),
        ModelKind::Forest => {
            ClassicalModel::Forest(forest_fit(&dtm, labels, n_classes, cfg.forest_params())?)
        }
        ModelKind::Gboost => {
            ClassicalModel::Gboost(gboost_fit(&dtm, labels, n_classes, cfg.gboost)?)
        }
        ModelKind::CnnLstm => unreachable!("handled above"),
    };
    Ok(ModelBundle::new(
        kind,
        class_names.to_vec(),
        Features::Bow { vocabulary },
        TrainedModel::Classical(model),
    ))
}

fn fit_cnn_lstm(
    cfg: &ExperimentConfig,
    tokens: &[TokenList],
    labels: &[usize],
    n_classes: usize,
    table: &EmbeddingTable,
    train_cfg: &TrainConfig,
) -> Result<CnnLstmModel> {
    let arch = cfg.cnn_lstm.architecture(table.dim(), n_classes);
    let init = CnnLstmModel::new(&arch, derive_seed(cfg.seed, 2))?;
    let batch = encode_sequences(tokens, labels, table, cfg.vectorize.max_len)?;
    Ok(neural::train(init, &batch, train_cfg)?.model)
}

/// Metrics of a fitted bundle on labeled documents.
pub fn evaluate_bundle(
    bundle: &ModelBundle,
    tokens: &[TokenList],
    labels: &[usize],
    embeddings: Option<&EmbeddingTable>,
) -> Result<MetricsReport> {
    let (preds, _) = bundle.predict(tokens, embeddings)?;
    evaluate(&preds, labels, &bundle.class_names)
}

#[derive(Debug, Clone)]
pub struct ModelResult {
    pub bundle: ModelBundle,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub results: Vec<ModelResult>,
    pub report: String,
}

impl ExperimentOutcome {
    pub fn rows(&self) -> Vec<(String, MetricsReport)> {
        self.results
            .iter()
            .map(|r| (r.bundle.kind.display_name().to_owned(), r.metrics.clone()))
            .collect()
    }
}

/// Fits every selected model on the training part and scores it on the
/// test part. Models are fitted concurrently; rows keep report order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let data = prepare(cfg)?;
    let embeddings = load_embeddings(cfg)?;
    let (train_tokens, train_labels) = data.subset(&data.train);
    let (test_tokens, test_labels) = data.subset(&data.test);
    let results = cfg
        .model
        .kinds()
        .into_par_iter()
        .map(|kind| {
            let bundle = fit_model(
                kind,
                cfg,
                &train_tokens,
                &train_labels,
                data.class_names(),
                embeddings.as_ref(),
            )?;
            let metrics =
                evaluate_bundle(&bundle, &test_tokens, &test_labels, embeddings.as_ref())?;
            Ok(ModelResult { bundle, metrics })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<(String, MetricsReport)> = results
        .iter()
        .map(|r| (r.bundle.kind.display_name().to_owned(), r.metrics.clone()))
        .collect();
    let report = render_report(&rows, cfg.report);
    Ok(ExperimentOutcome { results, report })
}

#[derive(Debug, Clone)]
pub struct SearchRun {
    pub outcome: SearchOutcome,
    pub result: ModelResult,
    pub report: String,
}

impl SearchRun {
    pub fn trace_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.outcome.trace).expect("trace serializes");
        s.push('\n');
        s
    }

    pub fn best_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&serde_json::json!({
            "config": self.outcome.best,
            "validation_accuracy": self.outcome.best_score,
            "evaluations": self.outcome.evaluations,
            "passes": self.outcome.passes,
        }))
        .expect("search summary serializes");
        s.push('\n');
        s
    }
}

/// Greedy search for the CNN-LSTM: candidates train on the training part
/// minus a validation slice and are scored by validation accuracy; the best
/// configuration is retrained on the whole training part and evaluated on
/// the test part. A candidate whose training diverges scores -inf.
pub fn run_search(cfg: &ExperimentConfig) -> Result<SearchRun> {
    if cfg.model != ModelSelector::One(ModelKind::CnnLstm) {
        return Err(Error::Config("search requires model = \"cnn-lstm\"".into()));
    }
    cfg.validate()?;
    cfg.search.grid.validate()?;
    let data = prepare(cfg)?;
    let table = load_embeddings(cfg)?.expect("validated above");
    let (train_tokens, train_labels) = data.subset(&data.train);
    let (fit_idx, val_idx) = carve_validation(
        &train_labels,
        cfg.search.validation_fraction,
        cfg.stratified,
        derive_seed(cfg.seed, 4),
    )?;
    if fit_idx.is_empty() || val_idx.is_empty() {
        return Err(Error::EmptyDataset(
            "training part too small to carve a validation set".into(),
        ));
    }
    let pick = |idx: &[usize]| -> (Vec<TokenList>, Vec<usize>) {
        (
            idx.iter().map(|&i| train_tokens[i].clone()).collect(),
            idx.iter().map(|&i| train_labels[i]).collect(),
        )
    };
    let (fit_tokens, fit_labels) = pick(&fit_idx);
    let (val_tokens, val_labels) = pick(&val_idx);
    let n_classes = data.dataset.n_classes();
    let val_batch = encode_sequences(&val_tokens, &val_labels, &table, cfg.vectorize.max_len)?;
    let train_seed = derive_seed(cfg.seed, 3);

    let outcome = greedy_search(
        &cfg.search.grid,
        |point| {
            let tc = point.train_config(train_seed);
            match fit_cnn_lstm(cfg, &fit_tokens, &fit_labels, n_classes, &table, &tc) {
                Ok(m) => Ok(Some(m)),
                Err(Error::Numeric(_)) => Ok(None),
                Err(e) => Err(e),
            }
        },
        |model| match model {
            Some(m) => {
                let (preds, _) = neural::predict(m, &val_batch)?;
                let hits = preds
                    .iter()
                    .zip(&val_labels)
                    .filter(|(p, y)| p == y)
                    .count();
                Ok(hits as f64 / val_labels.len() as f64)
            }
            None => Ok(f64::NEG_INFINITY),
        },
        &cfg.search.axis_order,
    )?;

    let mut final_cfg = cfg.clone();
    let best = outcome.best;
    final_cfg.cnn_lstm.epochs = best.epochs;
    final_cfg.cnn_lstm.batch_size = best.batch_size;
    final_cfg.cnn_lstm.learning_rate = best.learning_rate;
    final_cfg.cnn_lstm.optimizer = best.optimizer;
    let bundle = fit_model(
        ModelKind::CnnLstm,
        &final_cfg,
        &train_tokens,
        &train_labels,
        data.class_names(),
        Some(&table),
    )?;
    let (test_tokens, test_labels) = data.subset(&data.test);
    let metrics = evaluate_bundle(&bundle, &test_tokens, &test_labels, Some(&table))?;
    let report = render_report(
        &[(
            ModelKind::CnnLstm.display_name().to_owned(),
            metrics.clone(),
        )],
        cfg.report,
    );
    Ok(SearchRun {
        outcome,
        result: ModelResult { bundle, metrics },
        report,
    })
}

/// Evaluates saved bundles on the test part of the configured split, or on
/// every document of `input` when given. Labels are matched by name.
pub fn run_evaluate(
    cfg: &ExperimentConfig,
    bundles: &[ModelBundle],
    input: Option<&Path>,
) -> Result<String> {
    let pre = cfg.preprocess_config()?;
    let (dataset, indices) = match input {
        Some(p) => {
            let ds = load_dataset(p)?;
            let all: Vec<usize> = (0..ds.len()).collect();
            (ds, all)
        }
        None => {
            let ds = load_dataset(&cfg.dataset)?;
            let (_, test) = split(&ds.labels(), ds.n_classes(), &cfg.split_spec())?;
            (ds, test)
        }
    };
    let texts: Vec<&str> = indices
        .iter()
        .map(|&i| dataset.documents[i].text.as_str())
        .collect();
    let tokens = preprocess_all(&texts, &pre);
    let embeddings = if bundles.iter().any(ModelBundle::needs_embeddings) {
        let path = cfg.embedding.as_ref().ok_or_else(|| {
            Error::Config("the cnn-lstm model requires an `embedding` path".into())
        })?;
        Some(load_embedding_table(path)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(bundles.len());
    for bundle in bundles {
        let labels = indices
            .iter()
            .map(|&i| {
                let label = &dataset.documents[i].label;
                bundle
                    .class_names
                    .iter()
                    .position(|c| c == label)
                    .ok_or_else(|| {
                        Error::Config(format!("label `{label}` is unknown to the model"))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let metrics = evaluate_bundle(bundle, &tokens, &labels, embeddings.as_ref())?;
        rows.push((bundle.kind.display_name().to_owned(), metrics));
    }
    Ok(render_report(&rows, cfg.report))
}

/// One space-joined token line per document, in input order.
pub fn cmd_preprocess(texts: &[&str], cfg: &PreprocessConfig) -> String {
    let mut out = String::new();
    for tokens in preprocess_all(texts, cfg) {
        out.push_str(&tokens.to_string());
        out.push('\n');
    }
    out
}
