//! Function-word probing toolkit.
//!
//! Generates probing datasets by targeted mutation of corpus sentences,
//! aggregates crowd annotations into labeled sets, trains a small reference
//! classifier and runs the analysis suite over model predictions.

pub mod annotate;
pub mod corpus;
pub mod evaluate;
pub mod hash;
pub mod model;
pub mod mutate;
pub mod task;

pub use task::{Label, Task, TaskFormat};
