use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{Loss, Optimizer, TrainConfig};

pub const MAX_PASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Epochs,
    BatchSize,
    LearningRate,
    Loss,
    Optimizer,
}

impl Axis {
    pub const DEFAULT_ORDER: [Axis; 5] = [
        Axis::Epochs,
        Axis::BatchSize,
        Axis::LearningRate,
        Axis::Loss,
        Axis::Optimizer,
    ];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::Epochs => "epochs",
            Axis::BatchSize => "batch_size",
            Axis::LearningRate => "learning_rate",
            Axis::Loss => "loss",
            Axis::Optimizer => "optimizer",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::DEFAULT_ORDER
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown search axis `{s}`")))
    }
}

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub loss: Loss,
    pub optimizer: Optimizer,
}

impl GridPoint {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            loss: self.loss,
            optimizer: self.optimizer,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub epochs: Vec<usize>,
    pub batch_size: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub loss: Vec<Loss>,
    pub optimizer: Vec<Optimizer>,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            epochs: vec![5, 10, 20, 30, 50, 100],
            batch_size: vec![2, 4, 8, 16, 32, 64],
            learning_rate: vec![0.1, 0.01, 0.001, 0.0001, 0.00001, 0.000001],
            loss: vec![Loss::CategoricalCrossEntropy],
            optimizer: vec![Optimizer::Adam, Optimizer::Sgd],
        }
    }
}

impl SearchGrid {
    pub fn axis_len(&self, axis: Axis) -> usize {
        match axis {
            Axis::Epochs => self.epochs.len(),
            Axis::BatchSize => self.batch_size.len(),
            Axis::LearningRate => self.learning_rate.len(),
            Axis::Loss => self.loss.len(),
            Axis::Optimizer => self.optimizer.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for axis in Axis::DEFAULT_ORDER {
            if self.axis_len(axis) == 0 {
                return Err(Error::Config(format!("search axis `{axis}` is empty")));
            }
        }
        Ok(())
    }

    /// Number of points in the full product grid.
    pub fn size(&self) -> usize {
        Axis::DEFAULT_ORDER
            .iter()
            .map(|&a| self.axis_len(a))
            .product()
    }

    /// Point at per-axis value indices (in [`Axis::DEFAULT_ORDER`] slots).
    pub fn point(&self, idx: [usize; 5]) -> GridPoint {
        GridPoint {
            epochs: self.epochs[idx[0]],
            batch_size: self.batch_size[idx[1]],
            learning_rate: self.learning_rate[idx[2]],
            loss: self.loss[idx[3]],
            optimizer: self.optimizer[idx[4]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub config: GridPoint,
    pub score: f64,
    /// 1-based sweep number.
    pub pass: usize,
    pub axis: Axis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub best: GridPoint,
    pub best_score: f64,
    /// Every candidate considered, in sweep order.
    pub trace: Vec<TraceEntry>,
    /// Distinct configurations actually trained.
    pub evaluations: usize,
    pub passes: usize,
}

fn better(candidate: f64, incumbent: f64) -> bool {
    // NaN never wins
    candidate > incumbent || (incumbent.is_nan() && !candidate.is_nan())
}

/// Coordinate descent over the grid: start from the first value of every
/// axis, sweep the axes in `axis_order` trying each value with the others
/// held fixed, keep strict improvements (ties stay with the earlier value),
/// and stop after a pass without change or after three passes. Each distinct
/// configuration is trained once; untried candidates of one axis are trained
/// in parallel.
pub fn greedy_search<M, T, S>(
    grid: &SearchGrid,
    train_fn: T,
    score_fn: S,
    axis_order: &[Axis],
) -> Result<SearchOutcome>
where
    M: Send,
    T: Fn(&GridPoint) -> Result<M> + Sync,
    S: Fn(&M) -> Result<f64> + Sync,
{
    grid.validate()?;
    if axis_order.is_empty() {
        return Err(Error::Config("axis order is empty".into()));
    }
    let mut memo: HashMap<[usize; 5], f64> = HashMap::new();
    let mut current = [0usize; 5];
    let mut trace = Vec::new();
    let mut passes = 0;

    for pass in 1..=MAX_PASSES {
        passes = pass;
        let mut changed = false;
        for &axis in axis_order {
            let slot = axis.slot();
            let candidates: Vec<[usize; 5]> = (0..grid.axis_len(axis))
                .map(|v| {
                    let mut idx = current;
                    idx[slot] = v;
                    idx
                })
                .collect();
            let fresh: Vec<[usize; 5]> = candidates
                .iter()
                .filter(|idx| !memo.contains_key(*idx))
                .copied()
                .collect();
            let scored = fresh
                .par_iter()
                .map(|idx| {
                    let model = train_fn(&grid.point(*idx))?;
                    score_fn(&model)
                })
                .collect::<Result<Vec<f64>>>()?;
            memo.extend(fresh.into_iter().zip(scored));

            let mut best_idx = current;
            let mut best_score = memo[&current];
            for idx in &candidates {
                let score = memo[idx];
                trace.push(TraceEntry {
                    config: grid.point(*idx),
                    score,
                    pass,
                    axis,
                });
                let earlier = idx[slot] < best_idx[slot];
                if better(score, best_score) || (earlier && score == best_score) {
                    best_idx = *idx;
                    best_score = score;
                }
            }
            if best_idx != current {
                current = best_idx;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(SearchOutcome {
        best: grid.point(current),
        best_score: memo[&current],
        trace,
        evaluations: memo.len(),
        passes,
    })
}
