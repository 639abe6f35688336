//! Short-text sentiment and emotion classification: Persian-aware text
//! cleaning, bag-of-words and embedding features, classical classifiers, a
//! CNN-LSTM network, evaluation and greedy hyperparameter search.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod neural;
pub mod persist;
pub mod preprocess;
pub mod search;
pub mod synth;
pub mod vectorize;

pub use error::{Error, Result};
