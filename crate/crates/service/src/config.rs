//! Configuration file: every tunable default in one TOML document.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use funcprobe_core::annotate::AnnotatorProfile;
use funcprobe_core::evaluate::Pooling;
use funcprobe_core::model::ProbeConfig;
use funcprobe_core::mutate::GenerateConfig;

/// The shipped defaults, as a commented TOML file.
pub const DEFAULT_CONFIG: &str = include_str!("../default_config.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub generate: GenerateConfig,
    pub annotation: AnnotationConfig,
    pub simulate: AnnotatorProfile,
    pub probe: ProbeConfig,
    pub evaluate: EvaluateConfig,
    pub service: ServiceConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            generate: GenerateConfig::default(),
            annotation: AnnotationConfig::default(),
            simulate: AnnotatorProfile::uniform(8, 0.8),
            probe: ProbeConfig::default(),
            evaluate: EvaluateConfig::default(),
            service: ServiceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotationConfig {
    pub responses_per_item: usize,
    /// Refuse to give an annotator an item they already hold or answered.
    pub distinct_annotators: bool,
    /// Unnatural items kept per acceptability task; naturals match it.
    pub balance_target: usize,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        AnnotationConfig { responses_per_item: 3, distinct_annotators: true, balance_target: 250 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub pooling: Pooling,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub data_dir: PathBuf,
    /// Directory of static files served at `/`, if any.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { bind: SocketAddr::from(([127, 0, 0, 1], 8080)), data_dir: PathBuf::from("data"), static_dir: None }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        toml::from_str(&raw).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    /// `path` if given, else the defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(Config::default()), Config::load)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_file_is_the_defaults() {
        let parsed: Config = toml::from_str(DEFAULT_CONFIG).unwrap();
        assert_eq!(parsed, Config::default());
    }

    #[test]
    fn partial_files_fill_in() {
        let c: Config = toml::from_str("seed = 7\n[probe.train]\nhidden = 64\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.probe.train.hidden, 64);
        assert_eq!(c.probe.folds, 10);
        assert_eq!(c.annotation, AnnotationConfig::default());
        assert!(toml::from_str::<Config>("sed = 7").is_err());
    }

    #[test]
    fn serialized_defaults_round_trip() {
        let c = Config::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(toml::from_str::<Config>(&text).unwrap(), c);
    }
}
