//! Run configuration: a JSON document, overridable key by key.
//!
//! Precedence is flags over config file over defaults. Relative paths in a
//! config file are resolved against the file's own directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use super::export::{ExportError, ExportFormat};
use crate::ballots::{BallotError, WeightScheme};
use crate::reputation::{NormalizationMode, Platform, ReputationError, ZeroDenominatorPolicy};

/// Environment variable consulted when no `--config` is given.
pub const CONFIG_ENV: &str = "ORGKNOW_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: reading {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("config: missing required field `{0}`")]
    MissingField(&'static str),
    #[error("config: `export_formats` must name at least one format")]
    NoFormats,
    #[error("config: platform `{0}` is configured more than once")]
    DuplicatePlatform(Platform),
    #[error("config: {0}")]
    Scheme(#[from] BallotError),
    #[error("config: {0}")]
    Platform(#[from] ReputationError),
    #[error("config: {0}")]
    Format(#[from] ExportError),
    #[error("config: invalid `--metrics` value `{0}` (expected <platform>=<path>)")]
    MetricsFlag(String),
}

/// Which reputation formula a metrics file feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricsKind {
    Follower,
    Endorsement,
    /// Decided from the file's header row when it is read.
    Detect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsInput {
    pub path: PathBuf,
    pub kind: MetricsKind,
}

/// Partial configuration as read from JSON or assembled from CLI flags.
/// Every field is optional so layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub roster_path: Option<PathBuf>,
    pub ballots_path: Option<PathBuf>,
    #[serde(default)]
    pub follower_metrics_paths: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub endorsement_metrics_paths: BTreeMap<String, PathBuf>,
    /// Platform files whose shape is taken from their header.
    #[serde(default)]
    pub metrics_paths: BTreeMap<String, PathBuf>,
    pub weight_scheme: Option<Vec<f64>>,
    pub zero_denominator_policy: Option<ZeroDenominatorPolicy>,
    pub normalization: Option<NormalizationMode>,
    pub output_dir: Option<PathBuf>,
    pub export_formats: Option<Vec<String>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: ConfigFile =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.to_path_buf(),
                source,
            })?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.roster_path.iter_mut().for_each(fix);
        self.ballots_path.iter_mut().for_each(fix);
        self.output_dir.iter_mut().for_each(fix);
        self.follower_metrics_paths.values_mut().for_each(fix);
        self.endorsement_metrics_paths.values_mut().for_each(fix);
        self.metrics_paths.values_mut().for_each(fix);
    }

    /// Layers `self` on top of `base`: any value set here wins. Metrics
    /// entries are merged per platform.
    pub fn over(self, base: ConfigFile) -> ConfigFile {
        let mut merged = base;
        for (platform, path) in self.follower_metrics_paths {
            merged.endorsement_metrics_paths.remove(&platform);
            merged.metrics_paths.remove(&platform);
            merged.follower_metrics_paths.insert(platform, path);
        }
        for (platform, path) in self.endorsement_metrics_paths {
            merged.follower_metrics_paths.remove(&platform);
            merged.metrics_paths.remove(&platform);
            merged.endorsement_metrics_paths.insert(platform, path);
        }
        for (platform, path) in self.metrics_paths {
            merged.follower_metrics_paths.remove(&platform);
            merged.endorsement_metrics_paths.remove(&platform);
            merged.metrics_paths.insert(platform, path);
        }
        ConfigFile {
            roster_path: self.roster_path.or(merged.roster_path),
            ballots_path: self.ballots_path.or(merged.ballots_path),
            follower_metrics_paths: merged.follower_metrics_paths,
            endorsement_metrics_paths: merged.endorsement_metrics_paths,
            metrics_paths: merged.metrics_paths,
            weight_scheme: self.weight_scheme.or(merged.weight_scheme),
            zero_denominator_policy: self
                .zero_denominator_policy
                .or(merged.zero_denominator_policy),
            normalization: self.normalization.or(merged.normalization),
            output_dir: self.output_dir.or(merged.output_dir),
            export_formats: self.export_formats.or(merged.export_formats),
        }
    }

    /// Adds a `<platform>=<path>` metrics entry, shape detected later.
    pub fn add_metrics_flag(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (platform, path) = spec
            .split_once('=')
            .filter(|(p, f)| !p.trim().is_empty() && !f.trim().is_empty())
            .ok_or_else(|| ConfigError::MetricsFlag(spec.to_string()))?;
        self.metrics_paths
            .insert(platform.trim().to_string(), PathBuf::from(path.trim()));
        Ok(())
    }

    pub fn resolve(self) -> Result<PipelineConfig, ConfigError> {
        let roster_path = self
            .roster_path
            .ok_or(ConfigError::MissingField("roster_path"))?;
        let ballots_path = self
            .ballots_path
            .ok_or(ConfigError::MissingField("ballots_path"))?;

        let mut metrics = BTreeMap::new();
        let sources = [
            (self.follower_metrics_paths, MetricsKind::Follower),
            (self.endorsement_metrics_paths, MetricsKind::Endorsement),
            (self.metrics_paths, MetricsKind::Detect),
        ];
        for (paths, kind) in sources {
            for (label, path) in paths {
                let platform = Platform::new(&label)?;
                if metrics.contains_key(&platform) {
                    return Err(ConfigError::DuplicatePlatform(platform));
                }
                metrics.insert(platform, MetricsInput { path, kind });
            }
        }

        let weight_scheme = match self.weight_scheme {
            Some(w) => WeightScheme::new(w)?,
            None => WeightScheme::default(),
        };
        let export_formats = match self.export_formats {
            Some(list) => {
                let formats = ExportFormat::parse_list(&list.join(","))?;
                if formats.is_empty() {
                    return Err(ConfigError::NoFormats);
                }
                formats
            }
            None => ExportFormat::ALL.to_vec(),
        };
        Ok(PipelineConfig {
            roster_path,
            ballots_path,
            metrics,
            weight_scheme,
            zero_denominator_policy: self.zero_denominator_policy.unwrap_or_default(),
            normalization: self.normalization.unwrap_or_default(),
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            export_formats,
        })
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub roster_path: PathBuf,
    pub ballots_path: PathBuf,
    pub metrics: BTreeMap<Platform, MetricsInput>,
    pub weight_scheme: WeightScheme,
    pub zero_denominator_policy: ZeroDenominatorPolicy,
    pub normalization: NormalizationMode,
    pub output_dir: PathBuf,
    pub export_formats: Vec<ExportFormat>,
}
