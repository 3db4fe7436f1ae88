//! Peer-ranking ballots and the knowledge network built from them.
//!
//! Each respondent ranks up to `K` colleagues, best first. Rank `r` becomes
//! an arc `respondent -> target` weighted by the scheme's `r`-th weight.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::graph::{DirectedWeightedGraph, GraphError, NodeId, WeightedEdge};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BallotError {
    #[error("roster is empty")]
    EmptyRoster,
    #[error("ballot of respondent {respondent} is empty")]
    EmptyBallot { respondent: NodeId },
    #[error(
        "ballot of respondent {respondent} ranks {len} colleagues, scheme allows at most {max}"
    )]
    OverlongBallot {
        respondent: NodeId,
        len: usize,
        max: usize,
    },
    #[error("respondent {respondent} ranks themselves at rank {}", position + 1)]
    SelfVote { respondent: NodeId, position: usize },
    #[error("respondent {respondent} ranks {target} twice (ranks {} and {})", first + 1, position + 1)]
    DuplicateTarget {
        respondent: NodeId,
        target: NodeId,
        first: usize,
        position: usize,
    },
    /// `position` is `None` when the respondent itself is unknown.
    #[error("node {node} is not on the roster")]
    UnknownNode {
        node: NodeId,
        position: Option<usize>,
    },
    #[error("respondent {0} submitted more than one ballot")]
    DuplicateRespondent(NodeId),
    #[error("invalid weight scheme: {0}")]
    InvalidScheme(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Employee roster: id to display name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roster {
    entries: BTreeMap<NodeId, String>,
}

impl Roster {
    pub fn new(entries: BTreeMap<NodeId, String>) -> Result<Self, BallotError> {
        if entries.is_empty() {
            return Err(BallotError::EmptyRoster);
        }
        Ok(Roster { entries })
    }

    /// Roster `1..=n` with generated names, for tests and synthetic data.
    pub fn numbered(n: u32) -> Result<Self, BallotError> {
        let entries = (1..=n)
            .map(|i| Ok((NodeId::new(i)?, format!("EMPLOYEE {i}"))))
            .collect::<Result<_, GraphError>>()?;
        Roster::new(entries)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn name(&self, id: NodeId) -> Option<&str> {
        self.entries.get(&id).map(String::as_str)
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &str)> + '_ {
        self.entries.iter().map(|(&id, name)| (id, name.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id_set(&self) -> BTreeSet<NodeId> {
        self.entries.keys().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ballot {
    pub respondent: NodeId,
    /// Best first: `ranking[0]` holds rank 1.
    pub ranking: Vec<NodeId>,
}

impl Ballot {
    pub fn new(respondent: NodeId, ranking: Vec<NodeId>) -> Self {
        Ballot {
            respondent,
            ranking,
        }
    }
}

/// Rank to edge-weight mapping. `weights[r - 1]` is the weight of rank `r`;
/// the list length is the maximum ballot length `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightScheme {
    weights: Vec<f64>,
}

impl WeightScheme {
    pub fn new(weights: Vec<f64>) -> Result<Self, BallotError> {
        if weights.is_empty() {
            return Err(BallotError::InvalidScheme("no weights given".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(BallotError::InvalidScheme(format!(
                "weight {w} is not a finite positive number"
            )));
        }
        if let Some(pair) = weights.windows(2).find(|p| p[0] <= p[1]) {
            return Err(BallotError::InvalidScheme(format!(
                "weights must strictly decrease, found {} then {}",
                pair[0], pair[1]
            )));
        }
        Ok(WeightScheme { weights })
    }

    /// Maximum ballot length.
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of 1-based `rank`, or `None` past the end of the scheme.
    pub fn weight_for_rank(&self, rank: usize) -> Option<f64> {
        rank.checked_sub(1)
            .and_then(|i| self.weights.get(i))
            .copied()
    }
}

impl Default for WeightScheme {
    fn default() -> Self {
        default_scheme()
    }
}

/// Linear descending scheme: `K = 10`, weights `10, 9, ..., 1`.
pub fn default_scheme() -> WeightScheme {
    WeightScheme {
        weights: (1..=10).rev().map(f64::from).collect(),
    }
}

/// Checks a ballot against the roster and scheme, returning it unchanged.
pub fn validate_ballot(
    ballot: Ballot,
    roster: &Roster,
    scheme: &WeightScheme,
) -> Result<Ballot, BallotError> {
    check_ballot(&ballot, roster, scheme)?;
    Ok(ballot)
}

fn check_ballot(
    ballot: &Ballot,
    roster: &Roster,
    scheme: &WeightScheme,
) -> Result<(), BallotError> {
    let respondent = ballot.respondent;
    if ballot.ranking.is_empty() {
        return Err(BallotError::EmptyBallot { respondent });
    }
    if ballot.ranking.len() > scheme.k() {
        return Err(BallotError::OverlongBallot {
            respondent,
            len: ballot.ranking.len(),
            max: scheme.k(),
        });
    }
    if !roster.contains(respondent) {
        return Err(BallotError::UnknownNode {
            node: respondent,
            position: None,
        });
    }
    let mut seen: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (position, &target) in ballot.ranking.iter().enumerate() {
        if target == respondent {
            return Err(BallotError::SelfVote {
                respondent,
                position,
            });
        }
        if !roster.contains(target) {
            return Err(BallotError::UnknownNode {
                node: target,
                position: Some(position),
            });
        }
        if let Some(&first) = seen.get(&target) {
            return Err(BallotError::DuplicateTarget {
                respondent,
                target,
                first,
                position,
            });
        }
        seen.insert(target, position);
    }
    Ok(())
}

/// Builds the knowledge network over the whole roster, with the default
/// execution strategy for ballot validation.
pub fn build_knowledge_graph(
    ballots: &[Ballot],
    roster: &Roster,
    scheme: &WeightScheme,
) -> Result<DirectedWeightedGraph, BallotError> {
    build_knowledge_graph_with(ballots, roster, scheme, Execution::default())
}

pub fn build_knowledge_graph_with(
    ballots: &[Ballot],
    roster: &Roster,
    scheme: &WeightScheme,
    exec: Execution,
) -> Result<DirectedWeightedGraph, BallotError> {
    exec.try_map(ballots, |b| check_ballot(b, roster, scheme))?;

    let mut respondents = BTreeSet::new();
    for b in ballots {
        if !respondents.insert(b.respondent) {
            return Err(BallotError::DuplicateRespondent(b.respondent));
        }
    }

    let mut graph = DirectedWeightedGraph::new();
    for id in roster.ids() {
        graph.add_node(id);
    }
    for b in ballots {
        for (target, &weight) in b.ranking.iter().zip(scheme.weights()) {
            graph.add_edge(WeightedEdge::new(b.respondent, *target, weight))?;
        }
    }
    Ok(graph)
}

/// One row of the centrality ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CentralityRecord {
    pub node: NodeId,
    /// Total degree (in + out).
    pub degree: usize,
    /// Total weighted degree (in + out).
    pub weighted_degree: f64,
}

/// Ranking order: weighted degree descending, then degree descending, then
/// id ascending.
pub fn sort_centrality(records: &mut [CentralityRecord]) {
    records.sort_by(|a, b| {
        b.weighted_degree
            .total_cmp(&a.weighted_degree)
            .then(b.degree.cmp(&a.degree))
            .then(a.node.cmp(&b.node))
    });
}

pub fn centrality_table(graph: &DirectedWeightedGraph) -> Vec<CentralityRecord> {
    centrality_table_with(graph, Execution::default())
}

pub fn centrality_table_with(
    graph: &DirectedWeightedGraph,
    exec: Execution,
) -> Vec<CentralityRecord> {
    let nodes: Vec<NodeId> = graph.nodes().collect();
    let mut records = exec.map(&nodes, |&node| {
        // nodes come from the graph itself
        let degree = graph.degree(node).expect("node in graph");
        let weighted = graph.weighted_degree(node).expect("node in graph");
        CentralityRecord {
            node,
            degree: degree.total,
            weighted_degree: weighted.total,
        }
    });
    sort_centrality(&mut records);
    records
}
