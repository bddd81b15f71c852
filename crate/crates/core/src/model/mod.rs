//! Reference probing classifier: hashed sentence vectors, the pair
//! matching features and a small MLP.

mod embed;
mod mlp;
mod probe;

pub use embed::{embed_sentence, pair_features, SentenceVector, DEFAULT_DIM};
pub use mlp::{grad_check, softmax, train_mlp, Activation, EpochLog, Examples, MlpParams, Sgd, TrainConfig, Trained};
pub use probe::{item_features, run_probing, ProbeConfig, ProbeMode, ProbeOutcome};

use crate::evaluate::EvalError;
use crate::task::Task;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("empty input")]
    EmptyInput,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("loss became non-finite in epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("item `{item_id}` does not belong to task {task} or has the wrong shape")]
    TaskMismatch { item_id: String, task: Task },
    #[error("NLI mode needs a labeled training file")]
    MissingTrainingData,
    #[error("item `{0}` has no gold label")]
    MissingLabel(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
