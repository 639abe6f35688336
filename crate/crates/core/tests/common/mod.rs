#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sentikit::neural::{backward, forward, mean_loss, Architecture, CnnLstmModel, PARAM_BLOCKS};
use sentikit::vectorize::SequenceBatch;

pub const FD_STEP: f64 = 1e-5;
/// Gradients smaller than this are compared on an absolute scale.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GradCase {
    pub arch: Architecture,
    pub batch: SequenceBatch,
    pub model: CnnLstmModel,
    pub training: bool,
    pub mask_seed: u64,
}

/// A random tiny network and batch: T ≤ 8, d ≤ 4, F ≤ 3, H ≤ 3, C ≤ 3.
pub fn random_case(seed: u64) -> GradCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kernel_width = rng.random_range(2..=3);
    let pool_size = rng.random_range(1..=2);
    let arch = Architecture {
        input_dim: rng.random_range(1..=4),
        n_classes: rng.random_range(2..=3),
        filters: rng.random_range(1..=3),
        kernel_width,
        pool_size,
        hidden: rng.random_range(1..=3),
        dropout_rate: if seed.is_multiple_of(2) { 0.0 } else { 0.3 },
    };
    let max_len = rng.random_range(arch.min_sequence_len().max(4)..=8);
    let n = rng.random_range(2..=4);
    let mut data = vec![0.0; n * max_len * arch.input_dim];
    let mut lengths = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let len = rng.random_range(1..=max_len);
        for t in 0..len {
            for j in 0..arch.input_dim {
                data[(i * max_len + t) * arch.input_dim + j] = rng.random_range(-1.0..1.0);
            }
        }
        lengths.push(len);
        labels.push(rng.random_range(0..arch.n_classes));
    }
    let batch = SequenceBatch {
        data,
        lengths,
        labels,
        max_len,
        dim: arch.input_dim,
    };
    let mut model = CnnLstmModel::new(&arch, seed.wrapping_mul(31).wrapping_add(7)).unwrap();
    // nonzero biases so every parameter block carries signal
    for b in model.params_mut() {
        for v in b.iter_mut() {
            *v += rng.random_range(-0.2..0.2);
        }
    }
    GradCase {
        arch,
        batch,
        model,
        training: arch.dropout_rate > 0.0,
        mask_seed: seed + 1000,
    }
}

pub fn loss_at(case: &GradCase, model: &CnnLstmModel) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(case.mask_seed);
    let (probs, _) = forward(model, &case.batch, case.training, &mut rng).unwrap();
    mean_loss(&probs, &case.batch.labels)
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Max relative error between analytic and central-difference gradients,
/// per named parameter block.
pub fn gradient_errors(case: &GradCase) -> Vec<(&'static str, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(case.mask_seed);
    let (_, cache) = forward(&case.model, &case.batch, case.training, &mut rng).unwrap();
    let grads = backward(&case.model, &case.batch, &cache);
    let analytic: Vec<Vec<f64>> = grads.blocks().iter().map(|b| b.to_vec()).collect();

    let mut out = Vec::new();
    let mut probe = case.model.clone();
    for (bi, name) in PARAM_BLOCKS.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for (j, &grad) in analytic[bi].iter().enumerate() {
            let orig = probe.params()[bi][j];
            probe.params_mut()[bi][j] = orig + FD_STEP;
            let up = loss_at(case, &probe);
            probe.params_mut()[bi][j] = orig - FD_STEP;
            let down = loss_at(case, &probe);
            probe.params_mut()[bi][j] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            worst = worst.max(relative_error(grad, numeric));
        }
        out.push((*name, worst));
    }
    out
}
