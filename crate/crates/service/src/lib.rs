//! Annotation service, project persistence and the `funcprobe` command
//! line that ties generation, annotation, probing and evaluation together.

pub mod api;
pub mod cli;
pub mod config;
pub mod error;
pub mod store;
pub mod workflow;

pub use config::Config;
pub use error::{ErrorBody, ServiceError};

/// Version of every persisted record and API payload.
pub const SCHEMA_VERSION: u32 = 1;
