//! CNN-LSTM text classifier over embedded token sequences, with exact
//! backpropagation, Adam/SGD optimizers and seeded mini-batch training.

mod layers;
mod model;
mod optim;
mod train;

pub use layers::{
    apply_channel_mask, conv1d_forward, cross_entropy, dense_logits, dense_softmax, dropout_mask,
    lstm_forward, lstm_trace, maxpool1d, maxpool1d_with_indices, sigmoid, spatial_dropout,
    Conv1DLayer, DenseLayer, Gate, LstmCell, LstmTrace, PROB_FLOOR,
};
pub use model::{
    backward, forward, mean_loss, Architecture, CnnLstmModel, ForwardCache, Gradients, ItemCache,
    PARAM_BLOCKS,
};
pub use optim::{adam_step, sgd_step, AdamState};
pub use train::{evaluate_loss, predict, train, Loss, Optimizer, TrainConfig, TrainOutcome};
