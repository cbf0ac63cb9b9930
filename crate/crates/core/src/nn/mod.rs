//! One-hidden-layer regression network with selectable full-batch trainers.

mod network;
mod train;

use thiserror::Error;

pub use network::{init_network, Batch, Jacobian, Network, NetworkSpec, MAX_HIDDEN};
pub use train::{
    train, Algorithm, EpochRecord, History, RpropParams, StopReason, TrainedNetwork, TrainerSpec,
};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("hidden layer size must be in 1..=10, got {0}")]
    InvalidHidden(usize),
    #[error("input has {found} features, network expects {expected}")]
    Arity { expected: usize, found: usize },
    #[error("batch has {inputs} inputs but {targets} targets")]
    BatchShape { inputs: usize, targets: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid trainer hyperparameter {name} = {value}")]
    InvalidHyperparameter { name: &'static str, value: f64 },
    #[error("unknown training algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize, history: Box<History> },
}
