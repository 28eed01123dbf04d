//! Variational classifier with cut-aware training.

mod model;
mod train;

pub use model::{apply_head, argmax, build_model_circuit, parity_class, softmax_nll, BlockOrder, Head, ModelConfig};
pub use train::{
    accuracy, class_scores, confusion, confusion_matrix, fit, forward, grad_parameter_shift, init_weights, mean_loss,
    model_distribution, predict, predictions, score, Adagrad, Counters, EvalCounts, ForwardMode, GradientMask, Strategy,
    TrainConfig, TrainedModel, MODEL_SCHEMA_VERSION,
};
