use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{backward, forward, mean_loss, CnnLstmModel};
use super::optim::{adam_step, sgd_step, AdamState};
use crate::classical::argmax;
use crate::error::{Error, Result};
use crate::vectorize::SequenceBatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Adam,
    Sgd,
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Adam => "adam",
            Optimizer::Sgd => "sgd",
        })
    }
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adam" => Ok(Optimizer::Adam),
            "sgd" => Ok(Optimizer::Sgd),
            _ => Err(Error::Config(format!("unknown optimizer `{s}`"))),
        }
    }
}

/// Only categorical cross-entropy is trainable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    #[default]
    CategoricalCrossEntropy,
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("categorical_cross_entropy")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    #[serde(default)]
    pub loss: Loss,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for TrainConfig {
    /// The selected configuration: 10 epochs, batch 64, learning rate 1e-4, Adam.
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 64,
            learning_rate: 1e-4,
            loss: Loss::CategoricalCrossEntropy,
            optimizer: Optimizer::Adam,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(
                "learning rate must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Fitted network and the mean training loss of each epoch (measured on the
/// training-mode forward passes).
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: CnnLstmModel,
    pub epoch_losses: Vec<f64>,
}

/// Seeded shuffled mini-batch training. A single generator drives both the
/// shuffles and the dropout masks, so the trajectory depends only on the seed.
pub fn train(init: CnnLstmModel, data: &SequenceBatch, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    init.validate()?;
    init.check_input(data.max_len, data.dim)?;
    if data.is_empty() {
        return Err(Error::Config("no training data".into()));
    }
    let mut model = init;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sizes: Vec<usize> = model.params().iter().map(|b| b.len()).collect();
    let mut adam = AdamState::new(&sizes);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch = data.select(chunk);
            let (probs, cache) = forward(&model, &batch, true, &mut rng)?;
            loss_sum += mean_loss(&probs, &batch.labels) * chunk.len() as f64;
            let grads = backward(&model, &batch, &cache);
            let grad_blocks = grads.blocks();
            match cfg.optimizer {
                Optimizer::Sgd => {
                    for (p, g) in model.params_mut().into_iter().zip(grad_blocks) {
                        sgd_step(p, g, cfg.learning_rate);
                    }
                }
                Optimizer::Adam => {
                    let mut params = model.params_mut();
                    adam_step(&mut params, &grad_blocks, &mut adam, cfg.learning_rate);
                }
            }
        }
        let mean = loss_sum / data.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Numeric("training loss became non-finite".into()));
        }
        epoch_losses.push(mean);
    }
    Ok(TrainOutcome {
        model,
        epoch_losses,
    })
}

/// Inference-mode class and probability vector per item.
pub fn predict(model: &CnnLstmModel, batch: &SequenceBatch) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    // Inference draws no random numbers; the generator is never consulted.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (probs, _) = forward(model, batch, false, &mut rng)?;
    let classes = probs.iter().map(|p| argmax(p)).collect();
    Ok((classes, probs))
}

/// Inference-mode mean cross-entropy over the batch.
pub fn evaluate_loss(model: &CnnLstmModel, batch: &SequenceBatch) -> Result<f64> {
    let (_, probs) = predict(model, batch)?;
    Ok(mean_loss(&probs, &batch.labels))
}
