//! Organizational knowledge networks from peer-ranking ballots, fused with
//! social-media reputation.
//!
//! - [`graph`]: directed weighted graphs with degree, weighted degree and density.
//! - [`ballots`]: ballot validation, the rank-to-weight scheme, graph construction
//!   and the centrality ranking.
//! - [`reputation`]: per-platform reputation formulas, normalization and fusion.
//! - [`report`]: the combined knowledge/reputation network and ranked views.
//! - [`io`]: CSV ingestion, graph export/import and run configuration.
//! - [`pipeline`]: the end-to-end batch run.

pub mod ballots;
pub mod exec;
pub mod graph;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod reputation;

pub use ballots::{
    build_knowledge_graph, centrality_table, default_scheme, validate_ballot, Ballot, BallotError,
    CentralityRecord, Roster, WeightScheme,
};
pub use exec::Execution;
pub use graph::{Degree, DirectedWeightedGraph, GraphError, NodeId, WeightedDegree, WeightedEdge};
pub use pipeline::{run_pipeline, PipelineError, PipelineOutput};
pub use report::{combined_report, top_k, AnalysisReport, CombinedNodeRecord, RankKey};
pub use reputation::{
    endorsement_reputation, follower_reputation, normalize_platform, total_reputation,
    validate_additive_model, EndorsementMetrics, FollowerMetrics, NormalizedScore, Platform,
    RawScore, TotalReputation, ZeroDenominatorPolicy,
};
