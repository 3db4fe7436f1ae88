//! The combined network: knowledge-graph topology with node size driven by
//! total reputation, plus ranked views over it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::ser::Serializer;
use serde::Serialize;
use thiserror::Error;

use crate::ballots::{centrality_table, Roster};
use crate::graph::{DirectedWeightedGraph, NodeId};
use crate::reputation::{
    NormalizationMode, Platform, ReputationError, TotalReputation, ZeroDenominatorPolicy,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("{what} node set does not match the roster (missing {missing:?}, extra {extra:?})")]
    RosterMismatch {
        what: &'static str,
        missing: Vec<u32>,
        extra: Vec<u32>,
    },
    #[error("unknown ranking key `{0}`")]
    UnknownKey(String),
    #[error(transparent)]
    Platform(#[from] ReputationError),
}

/// A node's normalized score on one platform, or a marker that the node has
/// no account there. Serializes as a number or the string `"absent"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlatformScore {
    Score(f64),
    Absent,
}

impl PlatformScore {
    pub fn value(self) -> Option<f64> {
        match self {
            PlatformScore::Score(v) => Some(v),
            PlatformScore::Absent => None,
        }
    }
}

impl Serialize for PlatformScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            PlatformScore::Score(v) => serializer.serialize_f64(*v),
            PlatformScore::Absent => serializer.serialize_str("absent"),
        }
    }
}

/// Graph density, or the `"n<2"` marker when it is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Value(f64),
    TooFewNodes,
}

impl Density {
    pub fn value(self) -> Option<f64> {
        match self {
            Density::Value(v) => Some(v),
            Density::TooFewNodes => None,
        }
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Value(v) => write!(f, "{v:.3}"),
            Density::TooFewNodes => f.write_str("n<2"),
        }
    }
}

impl Serialize for Density {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Density::Value(v) => serializer.serialize_f64(*v),
            Density::TooFewNodes => serializer.serialize_str("n<2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedNodeRecord {
    pub node: NodeId,
    pub name: String,
    pub degree: usize,
    pub weighted_degree: f64,
    pub platform_scores: BTreeMap<Platform, PlatformScore>,
    pub total_reputation: f64,
    /// Node size in the combined network; equals `total_reputation`.
    pub size_attribute: f64,
    /// 1-based position in the centrality table.
    pub centrality_rank: usize,
    /// 1-based position in the combined (reputation-first) ordering.
    pub reputation_rank: usize,
    /// `centrality_rank - reputation_rank`. Positive when a node ranks
    /// higher on reputation than on internal knowledge votes.
    pub rank_delta: i64,
}

/// Settings that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSettings {
    pub weight_scheme: Vec<f64>,
    pub zero_denominator_policy: ZeroDenominatorPolicy,
    pub normalization: NormalizationMode,
    pub platforms: Vec<Platform>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: Density,
    pub generated_with: RunSettings,
    pub records: Vec<CombinedNodeRecord>,
}

fn check_nodes(
    what: &'static str,
    actual: &BTreeSet<NodeId>,
    roster: &BTreeSet<NodeId>,
) -> Result<(), ReportError> {
    if actual == roster {
        return Ok(());
    }
    Err(ReportError::RosterMismatch {
        what,
        missing: roster.difference(actual).map(|n| n.get()).collect(),
        extra: actual.difference(roster).map(|n| n.get()).collect(),
    })
}

/// Joins graph metrics with reputation totals, one record per roster node.
///
/// Records are ordered by total reputation descending, then weighted
/// degree descending, then id ascending.
pub fn combined_report(
    graph: &DirectedWeightedGraph,
    totals: &[TotalReputation],
    roster: &Roster,
    settings: RunSettings,
) -> Result<AnalysisReport, ReportError> {
    let roster_ids = roster.id_set();
    check_nodes("graph", &graph.node_set(), &roster_ids)?;
    let totals_by_node: BTreeMap<NodeId, &TotalReputation> =
        totals.iter().map(|t| (t.node, t)).collect();
    check_nodes(
        "reputation",
        &totals_by_node.keys().copied().collect(),
        &roster_ids,
    )?;

    let centrality = centrality_table(graph);
    let centrality_rank: BTreeMap<NodeId, usize> = centrality
        .iter()
        .enumerate()
        .map(|(i, r)| (r.node, i + 1))
        .collect();

    let mut records: Vec<CombinedNodeRecord> = centrality
        .iter()
        .map(|c| {
            let total = totals_by_node[&c.node];
            let platform_scores = settings
                .platforms
                .iter()
                .map(|p| {
                    let score = total
                        .components
                        .get(p)
                        .map_or(PlatformScore::Absent, |s| PlatformScore::Score(s.value));
                    (p.clone(), score)
                })
                .collect();
            CombinedNodeRecord {
                node: c.node,
                name: roster.name(c.node).unwrap_or_default().to_string(),
                degree: c.degree,
                weighted_degree: c.weighted_degree,
                platform_scores,
                total_reputation: total.value,
                size_attribute: total.value,
                centrality_rank: centrality_rank[&c.node],
                reputation_rank: 0,
                rank_delta: 0,
            }
        })
        .collect();
    sort_by_key(&mut records, &RankKey::TotalReputation);
    for (i, r) in records.iter_mut().enumerate() {
        r.reputation_rank = i + 1;
        r.rank_delta = r.centrality_rank as i64 - r.reputation_rank as i64;
    }

    let density = match graph.density() {
        Ok(d) => Density::Value(d),
        Err(_) => Density::TooFewNodes,
    };
    Ok(AnalysisReport {
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        density,
        generated_with: settings,
        records,
    })
}

/// Ordering used by [`top_k`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankKey {
    /// Total reputation, then weighted degree, then id.
    TotalReputation,
    /// Weighted degree, then degree, then id.
    WeightedDegree,
    /// Degree, then weighted degree, then id.
    Degree,
    /// One platform's score (absent accounts last), then total reputation,
    /// then id.
    Platform(Platform),
}

impl FromStr for RankKey {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "total_reputation" | "reputation" => Ok(RankKey::TotalReputation),
            "weighted_degree" => Ok(RankKey::WeightedDegree),
            "degree" => Ok(RankKey::Degree),
            other => match other.strip_prefix("platform:") {
                Some(p) => Ok(RankKey::Platform(Platform::new(p)?)),
                None => Err(ReportError::UnknownKey(other.to_string())),
            },
        }
    }
}

fn sort_by_key(records: &mut [CombinedNodeRecord], key: &RankKey) {
    records.sort_by(|a, b| {
        let primary = match key {
            RankKey::TotalReputation => b
                .total_reputation
                .total_cmp(&a.total_reputation)
                .then(b.weighted_degree.total_cmp(&a.weighted_degree)),
            RankKey::WeightedDegree => b
                .weighted_degree
                .total_cmp(&a.weighted_degree)
                .then(b.degree.cmp(&a.degree)),
            RankKey::Degree => b
                .degree
                .cmp(&a.degree)
                .then(b.weighted_degree.total_cmp(&a.weighted_degree)),
            RankKey::Platform(p) => {
                let score = |r: &CombinedNodeRecord| {
                    r.platform_scores
                        .get(p)
                        .and_then(|s| s.value())
                        .unwrap_or(f64::NEG_INFINITY)
                };
                score(b)
                    .total_cmp(&score(a))
                    .then(b.total_reputation.total_cmp(&a.total_reputation))
            }
        };
        primary.then(a.node.cmp(&b.node))
    });
}

/// The first `k` records under `key`; `k` larger than the report returns
/// every record.
pub fn top_k(report: &AnalysisReport, k: usize, key: &RankKey) -> Vec<CombinedNodeRecord> {
    let mut records = report.records.clone();
    sort_by_key(&mut records, key);
    records.truncate(k);
    records
}
