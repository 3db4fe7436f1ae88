//! File formats: CSV ingestion, graph export/import, run configuration.

mod config;
mod export;
mod tables;

pub use config::{ConfigError, ConfigFile, MetricsInput, MetricsKind, PipelineConfig, CONFIG_ENV};
pub use export::{
    export_graph, import_graph, AttrValue, ExportError, ExportFormat, ExportedGraph, NodeAttributes,
};
pub use tables::{
    detect_metrics_kind, parse_ballots, parse_endorsement_metrics, parse_follower_metrics,
    parse_roster,
};

use thiserror::Error;

use crate::ballots::BallotError;
use crate::graph::NodeId;

/// Errors from reading the CSV inputs. Every row-level variant carries the
/// 1-based line number of the offending row.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("line 1: expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },
    #[error("line {line}: duplicate id {id} (first seen on line {first_line})")]
    DuplicateId {
        id: NodeId,
        first_line: u64,
        line: u64,
    },
    #[error("roster has no entries")]
    EmptyRoster,
    #[error("line {line}: node {id} is not on the roster")]
    UnknownNode { line: u64, id: NodeId },
    #[error("line {line}: column `{column}` is negative ({value})")]
    NegativeCount {
        line: u64,
        column: &'static str,
        value: i128,
    },
    #[error("line {line}: respondent {respondent} has no rank {missing}")]
    RankGap {
        line: u64,
        respondent: NodeId,
        missing: usize,
    },
    #[error(
        "line {line}: respondent {respondent} uses rank {rank} twice (first on line {first_line})"
    )]
    DuplicateRank {
        line: u64,
        respondent: NodeId,
        rank: usize,
        first_line: u64,
    },
    #[error("line {line}: {source}")]
    Ballot {
        line: u64,
        #[source]
        source: BallotError,
    },
}

impl InputError {
    /// True for well-formed input that breaks a data rule, as opposed to
    /// unreadable or malformed files.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            InputError::Io(_)
                | InputError::Csv { .. }
                | InputError::Header { .. }
                | InputError::MalformedRow { .. }
        )
    }

    pub fn line(&self) -> Option<u64> {
        match self {
            InputError::Csv { line, .. }
            | InputError::MalformedRow { line, .. }
            | InputError::DuplicateId { line, .. }
            | InputError::UnknownNode { line, .. }
            | InputError::NegativeCount { line, .. }
            | InputError::RankGap { line, .. }
            | InputError::DuplicateRank { line, .. }
            | InputError::Ballot { line, .. } => Some(*line),
            InputError::Header { .. } => Some(1),
            InputError::Io(_) | InputError::EmptyRoster => None,
        }
    }
}
