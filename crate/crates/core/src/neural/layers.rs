//! Layer primitives of the CNN-LSTM. Sequences are row-major `[T × channels]`
//! slices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Valid 1-D convolution with ReLU. `weights` is `[filters][kernel_width][input_dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv1DLayer {
    pub filters: usize,
    pub kernel_width: usize,
    pub input_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Conv1DLayer {
    pub fn zeros(filters: usize, kernel_width: usize, input_dim: usize) -> Self {
        Conv1DLayer {
            filters,
            kernel_width,
            input_dim,
            weights: vec![0.0; filters * kernel_width * input_dim],
            biases: vec![0.0; filters],
        }
    }

    #[inline]
    pub fn w(&self, f: usize, j: usize, i: usize) -> f64 {
        self.weights[(f * self.kernel_width + j) * self.input_dim + i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Output = 2,
    Cell = 3,
}

/// LSTM cell. Each gate has weights `[hidden][hidden + input_dim]` acting on
/// the concatenation `[h_{t-1}, x_t]`. Gates are indexed by [`Gate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    pub hidden: usize,
    pub input_dim: usize,
    pub weights: [Vec<f64>; 4],
    pub biases: [Vec<f64>; 4],
}

impl LstmCell {
    pub fn zeros(hidden: usize, input_dim: usize) -> Self {
        let w = vec![0.0; hidden * (hidden + input_dim)];
        let b = vec![0.0; hidden];
        LstmCell {
            hidden,
            input_dim,
            weights: [w.clone(), w.clone(), w.clone(), w],
            biases: [b.clone(), b.clone(), b.clone(), b],
        }
    }

    pub fn concat_dim(&self) -> usize {
        self.hidden + self.input_dim
    }
}

/// Fully connected output layer, `weights` is `[classes][input_dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub classes: usize,
    pub input_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(classes: usize, input_dim: usize) -> Self {
        DenseLayer {
            classes,
            input_dim,
            weights: vec![0.0; classes * input_dim],
            biases: vec![0.0; classes],
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `seq` is `[steps × input_dim]`; returns `[(steps - k + 1) × filters]`.
pub fn conv1d_forward(seq: &[f64], steps: usize, layer: &Conv1DLayer) -> Result<Vec<f64>> {
    let (k, d, nf) = (layer.kernel_width, layer.input_dim, layer.filters);
    debug_assert_eq!(seq.len(), steps * d);
    if steps < k {
        return Err(Error::SequenceTooShort {
            len: steps,
            required: k,
        });
    }
    let out_steps = steps - k + 1;
    let mut out = vec![0.0; out_steps * nf];
    for t in 0..out_steps {
        let window = &seq[t * d..(t + k) * d];
        for f in 0..nf {
            let w = &layer.weights[f * k * d..(f + 1) * k * d];
            let z = layer.biases[f] + w.iter().zip(window).map(|(a, b)| a * b).sum::<f64>();
            out[t * nf + f] = z.max(0.0);
        }
    }
    Ok(out)
}

/// Non-overlapping max pooling along time; returns the pooled values and,
/// per output cell, the source time step (first maximum wins).
pub fn maxpool1d_with_indices(
    x: &[f64],
    steps: usize,
    channels: usize,
    pool_size: usize,
) -> Result<(Vec<f64>, Vec<usize>)> {
    if pool_size == 0 || steps < pool_size {
        return Err(Error::SequenceTooShort {
            len: steps,
            required: pool_size.max(1),
        });
    }
    let out_steps = steps / pool_size;
    let mut out = vec![0.0; out_steps * channels];
    let mut idx = vec![0usize; out_steps * channels];
    for s in 0..out_steps {
        for c in 0..channels {
            let mut best_t = s * pool_size;
            for t in s * pool_size + 1..(s + 1) * pool_size {
                if x[t * channels + c] > x[best_t * channels + c] {
                    best_t = t;
                }
            }
            out[s * channels + c] = x[best_t * channels + c];
            idx[s * channels + c] = best_t;
        }
    }
    Ok((out, idx))
}

/// `[steps × channels]` → `[steps / pool_size × channels]`; the remainder is dropped.
pub fn maxpool1d(x: &[f64], steps: usize, channels: usize, pool_size: usize) -> Result<Vec<f64>> {
    maxpool1d_with_indices(x, steps, channels, pool_size).map(|(v, _)| v)
}

/// Everything one LSTM pass produces, each `[steps × hidden]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmTrace {
    pub hidden_states: Vec<f64>,
    pub cell_states: Vec<f64>,
    pub input_gate: Vec<f64>,
    pub forget_gate: Vec<f64>,
    pub output_gate: Vec<f64>,
    pub candidate: Vec<f64>,
}

/// Runs the cell over `steps` inputs from zero initial state.
pub fn lstm_trace(seq: &[f64], steps: usize, cell: &LstmCell) -> LstmTrace {
    let (h, d) = (cell.hidden, cell.input_dim);
    let cd = cell.concat_dim();
    debug_assert!(seq.len() >= steps * d);
    let mut tr = LstmTrace {
        hidden_states: vec![0.0; steps * h],
        cell_states: vec![0.0; steps * h],
        input_gate: vec![0.0; steps * h],
        forget_gate: vec![0.0; steps * h],
        output_gate: vec![0.0; steps * h],
        candidate: vec![0.0; steps * h],
    };
    let mut concat = vec![0.0; cd];
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    for t in 0..steps {
        concat[..h].copy_from_slice(&h_prev);
        concat[h..].copy_from_slice(&seq[t * d..(t + 1) * d]);
        for r in 0..h {
            let pre = |g: Gate| {
                let w = &cell.weights[g as usize][r * cd..(r + 1) * cd];
                cell.biases[g as usize][r] + w.iter().zip(&concat).map(|(a, b)| a * b).sum::<f64>()
            };
            let i = sigmoid(pre(Gate::Input));
            let f = sigmoid(pre(Gate::Forget));
            let o = sigmoid(pre(Gate::Output));
            let g = pre(Gate::Cell).tanh();
            let c = f * c_prev[r] + i * g;
            let at = t * h + r;
            tr.input_gate[at] = i;
            tr.forget_gate[at] = f;
            tr.output_gate[at] = o;
            tr.candidate[at] = g;
            tr.cell_states[at] = c;
            tr.hidden_states[at] = o * c.tanh();
        }
        h_prev.copy_from_slice(&tr.hidden_states[t * h..(t + 1) * h]);
        c_prev.copy_from_slice(&tr.cell_states[t * h..(t + 1) * h]);
    }
    tr
}

/// All hidden states `[steps × hidden]` from zero initial state.
pub fn lstm_forward(seq: &[f64], steps: usize, cell: &LstmCell) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::SequenceTooShort {
            len: 0,
            required: 1,
        });
    }
    Ok(lstm_trace(seq, steps, cell).hidden_states)
}

/// Per-channel multipliers: 0 for dropped channels, `1/(1-rate)` for kept
/// ones. One uniform draw per channel, in channel order.
pub fn dropout_mask<R: Rng + ?Sized>(channels: usize, rate: f64, rng: &mut R) -> Vec<f64> {
    let keep = 1.0 / (1.0 - rate);
    (0..channels)
        .map(|_| {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                keep
            }
        })
        .collect()
}

/// Zeroes whole channels across every time step while training; identity at
/// inference or when `rate` is 0 (no random draws are made then).
pub fn spatial_dropout<R: Rng + ?Sized>(
    x: &[f64],
    channels: usize,
    rate: f64,
    rng: &mut R,
    training: bool,
) -> Vec<f64> {
    if !training || rate == 0.0 {
        return x.to_vec();
    }
    let mask = dropout_mask(channels, rate, rng);
    apply_channel_mask(x, &mask)
}

pub fn apply_channel_mask(x: &[f64], mask: &[f64]) -> Vec<f64> {
    x.chunks(mask.len())
        .flat_map(|row| row.iter().zip(mask).map(|(a, m)| a * m))
        .collect()
}

/// Raw class scores `W·h + b`.
pub fn dense_logits(h: &[f64], dense: &DenseLayer) -> Vec<f64> {
    (0..dense.classes)
        .map(|c| {
            let w = &dense.weights[c * dense.input_dim..(c + 1) * dense.input_dim];
            dense.biases[c] + w.iter().zip(h).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect()
}

pub fn dense_softmax(h: &[f64], dense: &DenseLayer) -> Vec<f64> {
    crate::classical::softmax(&dense_logits(h, dense))
}

pub const PROB_FLOOR: f64 = 1e-12;

/// `-ln p[label]`, with the probability clamped to at least 1e-12.
pub fn cross_entropy(probs: &[f64], label: usize) -> f64 {
    -probs[label].max(PROB_FLOOR).ln()
}
