//! Graph convolutional runtime model: architecture, manual backpropagation,
//! Adam, training loop, prediction and model files.

mod adam;
mod dataset;
mod io;
mod model;
mod network;
mod train;

pub use adam::{adam_step, AdamState};
pub use dataset::{load_dataset, parse_dataset_records, write_dataset_records, DatasetRecord};
pub use io::{load_model, model_from_bytes, model_to_bytes, save_model, FORMAT_VERSION, MAGIC};
pub use model::{
    Activation, AdamConfig, Aggregation, GcnConfig, GcnLayer, GcnModel, Linear, Parameters, TargetNorm, OUTPUTS,
};
pub use network::{forward_cached, gcn_backward, gcn_forward, mse_loss, ForwardCache, ForwardOutput};
pub use train::{
    evaluate, predict_runtimes, to_billable_seconds, train, train_many, EvalReport, TrainSample, Trained,
    DEFAULT_EPOCHS,
};
