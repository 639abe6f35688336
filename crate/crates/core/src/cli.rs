//! Command-line front end. Exit codes: 0 success, 2 configuration error,
//! 3 data-format error, 4 numeric failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataset::{load_dataset, save_dataset};
use crate::error::{Error, Result};
use crate::eval::ReportFormat;
use crate::experiment::{
    cmd_preprocess, run_evaluate, run_experiment, run_search, ExperimentConfig, ModelSelector,
};
use crate::persist::ModelBundle;
use crate::preprocess::PreprocessConfig;
use crate::synth::{generate, SynthSpec};

#[derive(Debug, Parser)]
#[command(
    name = "sentikit",
    version,
    about = "Persian tweet sentiment and emotion classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// Report format: tsv or json
    #[arg(long)]
    report: Option<ReportFormat>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one space-joined token line per document
    Preprocess {
        #[command(flatten)]
        common: Common,
        /// Dataset CSV; defaults to the configured dataset
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fit the selected models and report test-set metrics
    Train {
        #[command(flatten)]
        common: Common,
        /// Overrides the configured model selector
        #[arg(long)]
        model: Option<ModelSelector>,
    },
    /// Score saved model bundles
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Saved model bundle (repeatable)
        #[arg(long = "bundle", required = true)]
        bundles: Vec<PathBuf>,
        /// Labeled CSV to score in full instead of the configured test split
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Greedy hyperparameter search for the CNN-LSTM
    Search {
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic labeled corpus, embedding table and config
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 600)]
        docs: usize,
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 20)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distinct indicative tokens per class
        #[arg(long)]
        tokens_per_class: Option<usize>,
        /// Probability that a token is drawn from the document's class pool
        #[arg(long)]
        class_token_rate: Option<f64>,
        /// Zipf exponent of token frequencies within a pool
        #[arg(long)]
        zipf_exponent: Option<f64>,
        /// Spread of class-token embeddings around their class centroid
        #[arg(long)]
        token_spread: Option<f64>,
        /// Norm of the (mutually orthogonal) class centroids
        #[arg(long)]
        centroid_norm: Option<f64>,
    },
}

impl Common {
    fn load_config(&self) -> Result<ExperimentConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| Error::Config("--config is required".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(report) = self.report {
            cfg.report = report;
        }
        Ok(cfg)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn report_name(format: ReportFormat) -> &'static str {
    match format {
        ReportFormat::Tsv => "report.tsv",
        ReportFormat::Json => "report.json",
    }
}

fn print(text: &str) {
    let mut stdout = std::io::stdout().lock();
    // a closed pipe is not an error worth reporting
    let _ = stdout.write_all(text.as_bytes());
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Preprocess { common, input } => {
            let (pre, dataset_path) = match &common.config {
                Some(_) => {
                    let cfg = common.load_config()?;
                    (cfg.preprocess_config()?, input.unwrap_or(cfg.dataset))
                }
                None => {
                    let input = input.ok_or_else(|| {
                        Error::Config("preprocess needs --input or --config".into())
                    })?;
                    (PreprocessConfig::all_steps(), input)
                }
            };
            let dataset = load_dataset(&dataset_path)?;
            let texts: Vec<&str> = dataset.documents.iter().map(|d| d.text.as_str()).collect();
            let lines = cmd_preprocess(&texts, &pre);
            match &common.out {
                Some(dir) => write_file(&dir.join("tokens.txt"), &lines)?,
                None => print(&lines),
            }
        }
        Command::Train { common, model } => {
            let mut cfg = common.load_config()?;
            if let Some(m) = model {
                cfg.model = m;
            }
            let outcome = run_experiment(&cfg)?;
            if let Some(dir) = &common.out {
                write_file(&dir.join(report_name(cfg.report)), &outcome.report)?;
                for r in &outcome.results {
                    let path = dir
                        .join("models")
                        .join(format!("{}.json", r.bundle.kind.id()));
                    write_file(&path, &r.bundle.to_json())?;
                }
            }
            print(&outcome.report);
        }
        Command::Evaluate {
            common,
            bundles,
            input,
        } => {
            let cfg = common.load_config()?;
            let bundles = bundles
                .iter()
                .map(|p| ModelBundle::load(p))
                .collect::<Result<Vec<_>>>()?;
            let report = run_evaluate(&cfg, &bundles, input.as_deref())?;
            if let Some(dir) = &common.out {
                write_file(&dir.join(report_name(cfg.report)), &report)?;
            }
            print(&report);
        }
        Command::Search { common } => {
            let cfg = common.load_config()?;
            let run = run_search(&cfg)?;
            if let Some(dir) = &common.out {
                write_file(&dir.join(report_name(cfg.report)), &run.report)?;
                write_file(&dir.join("trace.json"), &run.trace_json())?;
                write_file(&dir.join("best_config.json"), &run.best_json())?;
                write_file(
                    &dir.join("models").join("cnn-lstm.json"),
                    &run.result.bundle.to_json(),
                )?;
            }
            print(&run.report);
        }
        Command::Synth {
            out,
            docs,
            classes,
            dim,
            seed,
            tokens_per_class,
            class_token_rate,
            zipf_exponent,
            token_spread,
            centroid_norm,
        } => {
            let defaults = SynthSpec::default();
            let spec = SynthSpec {
                n_docs: docs,
                n_classes: classes,
                dim,
                seed,
                tokens_per_class: tokens_per_class.unwrap_or(defaults.tokens_per_class),
                class_token_rate: class_token_rate.unwrap_or(defaults.class_token_rate),
                zipf_exponent: zipf_exponent.unwrap_or(defaults.zipf_exponent),
                token_spread: token_spread.unwrap_or(defaults.token_spread),
                centroid_norm: centroid_norm.unwrap_or(defaults.centroid_norm),
                ..defaults
            };
            let corpus = generate(&spec)?;
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            save_dataset(&out.join("corpus.csv"), &corpus.documents)?;
            write_file(
                &out.join("embeddings.txt"),
                &corpus.embeddings.to_word2vec_text(),
            )?;
            let cfg = ExperimentConfig::for_synthetic(
                PathBuf::from("corpus.csv"),
                PathBuf::from("embeddings.txt"),
                &spec,
            );
            write_file(&out.join("config.toml"), &cfg.to_toml_string())?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
