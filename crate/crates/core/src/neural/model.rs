use rand::distr::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::layers::{
    apply_channel_mask, conv1d_forward, cross_entropy, dense_logits, dropout_mask, lstm_trace,
    maxpool1d_with_indices, Conv1DLayer, DenseLayer, Gate, LstmCell, LstmTrace,
};
use crate::classical::softmax;
use crate::error::{Error, Result};
use crate::vectorize::SequenceBatch;

/// Layer sizes of the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub n_classes: usize,
    pub filters: usize,
    pub kernel_width: usize,
    pub pool_size: usize,
    pub hidden: usize,
    pub dropout_rate: f64,
}

impl Architecture {
    /// Default sizes: 32 filters of width 3, pool 2, 64 LSTM units, dropout 0.1.
    pub fn new(input_dim: usize, n_classes: usize) -> Self {
        Architecture {
            input_dim,
            n_classes,
            filters: 32,
            kernel_width: 3,
            pool_size: 2,
            hidden: 64,
            dropout_rate: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("input_dim", self.input_dim),
            ("filters", self.filters),
            ("kernel_width", self.kernel_width),
            ("pool_size", self.pool_size),
            ("hidden", self.hidden),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.n_classes < 2 {
            return Err(Error::Config("need at least 2 classes".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config("dropout rate must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Shortest padded sequence the conv + pool stack accepts.
    pub fn min_sequence_len(&self) -> usize {
        self.kernel_width + self.pool_size - 1
    }
}

/// Conv1D → MaxPool1D → LSTM → spatial dropout → dense softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnLstmModel {
    pub conv: Conv1DLayer,
    pub pool_size: usize,
    pub lstm: LstmCell,
    pub dropout_rate: f64,
    pub dense: DenseLayer,
}

/// Parameter-shaped gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub conv: Conv1DLayer,
    pub lstm: LstmCell,
    pub dense: DenseLayer,
}

fn blocks<'a>(conv: &'a Conv1DLayer, lstm: &'a LstmCell, dense: &'a DenseLayer) -> Vec<&'a [f64]> {
    let mut v: Vec<&[f64]> = vec![&conv.weights, &conv.biases];
    v.extend(lstm.weights.iter().map(Vec::as_slice));
    v.extend(lstm.biases.iter().map(Vec::as_slice));
    v.push(&dense.weights);
    v.push(&dense.biases);
    v
}

fn blocks_mut<'a>(
    conv: &'a mut Conv1DLayer,
    lstm: &'a mut LstmCell,
    dense: &'a mut DenseLayer,
) -> Vec<&'a mut [f64]> {
    let mut v: Vec<&mut [f64]> = vec![&mut conv.weights, &mut conv.biases];
    let LstmCell {
        weights, biases, ..
    } = lstm;
    v.extend(weights.iter_mut().map(Vec::as_mut_slice));
    v.extend(biases.iter_mut().map(Vec::as_mut_slice));
    v.push(&mut dense.weights);
    v.push(&mut dense.biases);
    v
}

/// Names of the parameter blocks, in [`CnnLstmModel::params`] order.
pub const PARAM_BLOCKS: [&str; 12] = [
    "conv.weights",
    "conv.biases",
    "lstm.w_input",
    "lstm.w_forget",
    "lstm.w_output",
    "lstm.w_cell",
    "lstm.b_input",
    "lstm.b_forget",
    "lstm.b_output",
    "lstm.b_cell",
    "dense.weights",
    "dense.biases",
];

impl Gradients {
    pub fn blocks(&self) -> Vec<&[f64]> {
        blocks(&self.conv, &self.lstm, &self.dense)
    }

    fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        blocks_mut(&mut self.conv, &mut self.lstm, &mut self.dense)
    }

    fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.blocks_mut().into_iter().zip(other.blocks()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    fn scale(&mut self, s: f64) {
        for block in self.blocks_mut() {
            block.iter_mut().for_each(|x| *x *= s);
        }
    }
}

fn glorot<R: Rng>(values: &mut [f64], fan_in: usize, fan_out: usize, rng: &mut R) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
    values.iter_mut().for_each(|v| *v = rng.sample(dist));
}

impl CnnLstmModel {
    /// Glorot-uniform weights from a seeded generator, zero biases except the
    /// forget gate (1.0).
    pub fn new(arch: &Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut conv = Conv1DLayer::zeros(arch.filters, arch.kernel_width, arch.input_dim);
        glorot(
            &mut conv.weights,
            arch.kernel_width * arch.input_dim,
            arch.kernel_width * arch.filters,
            &mut rng,
        );
        let mut lstm = LstmCell::zeros(arch.hidden, arch.filters);
        for w in &mut lstm.weights {
            glorot(w, arch.hidden + arch.filters, arch.hidden, &mut rng);
        }
        lstm.biases[Gate::Forget as usize].fill(1.0);
        let mut dense = DenseLayer::zeros(arch.n_classes, arch.hidden);
        glorot(&mut dense.weights, arch.hidden, arch.n_classes, &mut rng);
        Ok(CnnLstmModel {
            conv,
            pool_size: arch.pool_size,
            lstm,
            dropout_rate: arch.dropout_rate,
            dense,
        })
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            input_dim: self.conv.input_dim,
            n_classes: self.dense.classes,
            filters: self.conv.filters,
            kernel_width: self.conv.kernel_width,
            pool_size: self.pool_size,
            hidden: self.lstm.hidden,
            dropout_rate: self.dropout_rate,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.dense.classes
    }

    /// Checks that layer dimensions chain and every parameter is finite.
    pub fn validate(&self) -> Result<()> {
        self.architecture().validate()?;
        let c = &self.conv;
        let l = &self.lstm;
        let d = &self.dense;
        let shapes_ok = c.weights.len() == c.filters * c.kernel_width * c.input_dim
            && c.biases.len() == c.filters
            && l.input_dim == c.filters
            && l.weights
                .iter()
                .all(|w| w.len() == l.hidden * l.concat_dim())
            && l.biases.iter().all(|b| b.len() == l.hidden)
            && d.input_dim == l.hidden
            && d.weights.len() == d.classes * d.input_dim
            && d.biases.len() == d.classes;
        if !shapes_ok {
            return Err(Error::Config("layer dimensions do not chain".into()));
        }
        if self
            .params()
            .iter()
            .any(|b| b.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::Numeric("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Vec<&[f64]> {
        blocks(&self.conv, &self.lstm, &self.dense)
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        blocks_mut(&mut self.conv, &mut self.lstm, &mut self.dense)
    }

    pub fn num_params(&self) -> usize {
        self.params().iter().map(|b| b.len()).sum()
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            conv: Conv1DLayer::zeros(
                self.conv.filters,
                self.conv.kernel_width,
                self.conv.input_dim,
            ),
            lstm: LstmCell::zeros(self.lstm.hidden, self.lstm.input_dim),
            dense: DenseLayer::zeros(self.dense.classes, self.dense.input_dim),
        }
    }

    /// Rejects batches whose embedding width or padded length the network cannot take.
    pub fn check_input(&self, max_len: usize, dim: usize) -> Result<()> {
        if dim != self.conv.input_dim {
            return Err(Error::Config(format!(
                "embedding dimension {dim} does not match model input {}",
                self.conv.input_dim
            )));
        }
        let required = self.architecture().min_sequence_len();
        if max_len < required {
            return Err(Error::SequenceTooShort {
                len: max_len,
                required,
            });
        }
        Ok(())
    }

    /// Pooled time step whose hidden state feeds the classifier: the last
    /// one computed only from real (non-pad) tokens, or step 0 for very
    /// short documents.
    pub fn readout_step(&self, length: usize, max_len: usize) -> usize {
        let k = self.conv.kernel_width;
        let pooled_total = (max_len + 1 - k) / self.pool_size;
        let valid = (length + 1).saturating_sub(k) / self.pool_size;
        valid.clamp(1, pooled_total) - 1
    }
}

/// Intermediate values of one item's forward pass.
#[derive(Debug, Clone)]
pub struct ItemCache {
    conv_out: Vec<f64>,
    pool_index: Vec<usize>,
    pooled: Vec<f64>,
    readout: usize,
    lstm: LstmTrace,
    mask: Option<Vec<f64>>,
    features: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Forward caches for a whole batch, in item order.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub items: Vec<ItemCache>,
}

fn forward_item(
    model: &CnnLstmModel,
    x: &[f64],
    length: usize,
    max_len: usize,
    mask: Option<Vec<f64>>,
) -> Result<ItemCache> {
    let conv_out = conv1d_forward(x, max_len, &model.conv)?;
    let conv_steps = max_len - model.conv.kernel_width + 1;
    let (pooled, pool_index) =
        maxpool1d_with_indices(&conv_out, conv_steps, model.conv.filters, model.pool_size)?;
    let readout = model.readout_step(length, max_len);
    let lstm = lstm_trace(&pooled, readout + 1, &model.lstm);
    let h = model.lstm.hidden;
    let states = &lstm.hidden_states;
    let dropped = match &mask {
        Some(m) => apply_channel_mask(states, m),
        None => states.clone(),
    };
    let features = dropped[readout * h..(readout + 1) * h].to_vec();
    let probs = softmax(&dense_logits(&features, &model.dense));
    Ok(ItemCache {
        conv_out,
        pool_index,
        pooled,
        readout,
        lstm,
        mask,
        features,
        probs,
    })
}

/// Runs the network on every item. When training with a positive dropout
/// rate, one channel mask per item is drawn from `rng` in item order before
/// the (parallel) per-item passes.
pub fn forward<R: Rng + ?Sized>(
    model: &CnnLstmModel,
    batch: &SequenceBatch,
    training: bool,
    rng: &mut R,
) -> Result<(Vec<Vec<f64>>, ForwardCache)> {
    model.check_input(batch.max_len, batch.dim)?;
    let masks: Vec<Option<Vec<f64>>> = (0..batch.len())
        .map(|_| {
            (training && model.dropout_rate > 0.0)
                .then(|| dropout_mask(model.lstm.hidden, model.dropout_rate, rng))
        })
        .collect();
    let items = masks
        .into_par_iter()
        .enumerate()
        .map(|(i, mask)| forward_item(model, batch.item(i), batch.lengths[i], batch.max_len, mask))
        .collect::<Result<Vec<_>>>()?;
    let probs = items.iter().map(|c| c.probs.clone()).collect();
    Ok((probs, ForwardCache { items }))
}

fn backward_item(
    model: &CnnLstmModel,
    x: &[f64],
    max_len: usize,
    label: usize,
    cache: &ItemCache,
    scale: f64,
) -> Gradients {
    let mut g = model.zero_gradients();
    let (h, nf, k, d) = (
        model.lstm.hidden,
        model.conv.filters,
        model.conv.kernel_width,
        model.conv.input_dim,
    );
    let cd = model.lstm.concat_dim();
    let n_cls = model.dense.classes;

    // dense + softmax cross-entropy
    let dlogits: Vec<f64> = (0..n_cls)
        .map(|c| (cache.probs[c] - if c == label { 1.0 } else { 0.0 }) * scale)
        .collect();
    let mut dfeat = vec![0.0; h];
    for c in 0..n_cls {
        g.dense.biases[c] += dlogits[c];
        for r in 0..h {
            g.dense.weights[c * h + r] += dlogits[c] * cache.features[r];
            dfeat[r] += model.dense.weights[c * h + r] * dlogits[c];
        }
    }
    if let Some(mask) = &cache.mask {
        dfeat.iter_mut().zip(mask).for_each(|(v, m)| *v *= m);
    }

    // backpropagation through time from the readout step
    let tr = &cache.lstm;
    let steps = cache.readout + 1;
    let mut dpooled = vec![0.0; steps * nf];
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut dz = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];
    let mut concat = vec![0.0; cd];
    for t in (0..steps).rev() {
        let at = t * h;
        for r in 0..h {
            let dh = dh_next[r] + if t == cache.readout { dfeat[r] } else { 0.0 };
            let (i, f, o, gc) = (
                tr.input_gate[at + r],
                tr.forget_gate[at + r],
                tr.output_gate[at + r],
                tr.candidate[at + r],
            );
            let c = tr.cell_states[at + r];
            let c_prev = if t > 0 {
                tr.cell_states[at - h + r]
            } else {
                0.0
            };
            let tc = c.tanh();
            let d_o = dh * tc;
            let dc = dc_next[r] + dh * o * (1.0 - tc * tc);
            dz[Gate::Input as usize][r] = dc * gc * i * (1.0 - i);
            dz[Gate::Forget as usize][r] = dc * c_prev * f * (1.0 - f);
            dz[Gate::Output as usize][r] = d_o * o * (1.0 - o);
            dz[Gate::Cell as usize][r] = dc * i * (1.0 - gc * gc);
            dc_next[r] = dc * f;
        }
        if t > 0 {
            concat[..h].copy_from_slice(&tr.hidden_states[at - h..at]);
        } else {
            concat[..h].fill(0.0);
        }
        concat[h..].copy_from_slice(&cache.pooled[t * nf..(t + 1) * nf]);
        let mut dconcat = vec![0.0; cd];
        for q in 0..4 {
            let w = &model.lstm.weights[q];
            let gw = &mut g.lstm.weights[q];
            for r in 0..h {
                let z = dz[q][r];
                if z == 0.0 {
                    continue;
                }
                g.lstm.biases[q][r] += z;
                let row = r * cd;
                for col in 0..cd {
                    gw[row + col] += z * concat[col];
                    dconcat[col] += w[row + col] * z;
                }
            }
        }
        dh_next.copy_from_slice(&dconcat[..h]);
        dpooled[t * nf..(t + 1) * nf].copy_from_slice(&dconcat[h..]);
    }

    // max-pool routes each gradient to its source step; ReLU gates it
    let conv_steps = max_len - k + 1;
    let mut dconv = vec![0.0; conv_steps * nf];
    for s in 0..steps {
        for f in 0..nf {
            let src = cache.pool_index[s * nf + f];
            if cache.conv_out[src * nf + f] > 0.0 {
                dconv[src * nf + f] += dpooled[s * nf + f];
            }
        }
    }
    for t in 0..conv_steps {
        let window = &x[t * d..(t + k) * d];
        for f in 0..nf {
            let z = dconv[t * nf + f];
            if z == 0.0 {
                continue;
            }
            g.conv.biases[f] += z;
            let gw = &mut g.conv.weights[f * k * d..(f + 1) * k * d];
            gw.iter_mut().zip(window).for_each(|(w, xv)| *w += z * xv);
        }
    }
    g
}

/// Exact gradients of the mean batch cross-entropy. Per-item gradients may
/// be computed in parallel; they are summed in item order.
pub fn backward(model: &CnnLstmModel, batch: &SequenceBatch, cache: &ForwardCache) -> Gradients {
    let n = batch.len();
    let per_item: Vec<Gradients> = (0..n)
        .into_par_iter()
        .map(|i| {
            backward_item(
                model,
                batch.item(i),
                batch.max_len,
                batch.labels[i],
                &cache.items[i],
                1.0,
            )
        })
        .collect();
    let mut total = model.zero_gradients();
    for g in &per_item {
        total.add_assign(g);
    }
    if n > 0 {
        total.scale(1.0 / n as f64);
    }
    total
}

/// Mean cross-entropy of cached probabilities against the batch labels.
pub fn mean_loss(probs: &[Vec<f64>], labels: &[usize]) -> f64 {
    if probs.is_empty() {
        return 0.0;
    }
    probs
        .iter()
        .zip(labels)
        .map(|(p, &y)| cross_entropy(p, y))
        .sum::<f64>()
        / probs.len() as f64
}
