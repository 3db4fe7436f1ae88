//! Per-platform reputation scoring, normalization and fusion.
//!
//! Follower-style platforms score `followers/posts + followers/following`.
//! Endorsement-style platforms score
//! `endorsements/connections + endorsements/skills`. The engine picks the
//! formula from the shape of the metrics record, never from the platform
//! name.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ballots::Roster;
use crate::exec::Execution;
use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReputationError {
    #[error("node {node} on {platform}: `{field}` is zero (strict zero-denominator policy)")]
    ZeroDenominator {
        node: NodeId,
        platform: Platform,
        field: &'static str,
    },
    #[error("cannot normalize an empty score list")]
    EmptyInput,
    #[error("score list mixes platforms {expected} and {found}")]
    MixedPlatform { expected: Platform, found: Platform },
    #[error("unknown zero-denominator policy `{0}` (expected strict or clamp)")]
    UnknownPolicy(String),
    #[error("unknown normalization mode `{0}` (expected max or minmax)")]
    UnknownNormalization(String),
    #[error("invalid platform label `{0}`")]
    InvalidPlatform(String),
}

/// Platform label, stored lowercase (`twitter`, `instagram`, `linkedin`, ...).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Platform(String);

impl Platform {
    pub fn new(label: &str) -> Result<Self, ReputationError> {
        let label = label.trim().to_ascii_lowercase();
        let valid = !label.is_empty()
            && label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if valid {
            Ok(Platform(label))
        } else {
            Err(ReputationError::InvalidPlatform(label))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Platform {
    type Error = ReputationError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Platform::new(&value)
    }
}

impl From<Platform> for String {
    fn from(p: Platform) -> String {
        p.0
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowerMetrics {
    pub node: NodeId,
    pub platform: Platform,
    pub followers: u64,
    pub posts: u64,
    pub following: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndorsementMetrics {
    pub node: NodeId,
    pub platform: Platform,
    pub endorsements: u64,
    pub connections: u64,
    pub skills: u64,
}

/// Metrics for one node on one platform; the variant selects the formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlatformMetrics {
    Follower(FollowerMetrics),
    Endorsement(EndorsementMetrics),
}

impl PlatformMetrics {
    pub fn node(&self) -> NodeId {
        match self {
            PlatformMetrics::Follower(m) => m.node,
            PlatformMetrics::Endorsement(m) => m.node,
        }
    }

    pub fn platform(&self) -> &Platform {
        match self {
            PlatformMetrics::Follower(m) => &m.platform,
            PlatformMetrics::Endorsement(m) => &m.platform,
        }
    }

    pub fn score(&self, policy: ZeroDenominatorPolicy) -> Result<RawScore, ReputationError> {
        match self {
            PlatformMetrics::Follower(m) => follower_reputation(m, policy),
            PlatformMetrics::Endorsement(m) => endorsement_reputation(m, policy),
        }
    }
}

impl From<FollowerMetrics> for PlatformMetrics {
    fn from(m: FollowerMetrics) -> Self {
        PlatformMetrics::Follower(m)
    }
}

impl From<EndorsementMetrics> for PlatformMetrics {
    fn from(m: EndorsementMetrics) -> Self {
        PlatformMetrics::Endorsement(m)
    }
}

/// What to do with a zero denominator. `Clamp` replaces `d` by `max(d, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroDenominatorPolicy {
    Strict,
    #[default]
    Clamp,
}

impl FromStr for ZeroDenominatorPolicy {
    type Err = ReputationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strict" => Ok(ZeroDenominatorPolicy::Strict),
            "clamp" => Ok(ZeroDenominatorPolicy::Clamp),
            other => Err(ReputationError::UnknownPolicy(other.to_string())),
        }
    }
}

impl fmt::Display for ZeroDenominatorPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ZeroDenominatorPolicy::Strict => "strict",
            ZeroDenominatorPolicy::Clamp => "clamp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawScore {
    pub node: NodeId,
    pub platform: Platform,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedScore {
    pub node: NodeId,
    pub platform: Platform,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalReputation {
    pub node: NodeId,
    pub value: f64,
    /// Only platforms where the node has an account.
    pub components: BTreeMap<Platform, NormalizedScore>,
}

fn ratio_sum(
    numerator: u64,
    denominators: [(&'static str, u64); 2],
    node: NodeId,
    platform: &Platform,
    policy: ZeroDenominatorPolicy,
) -> Result<f64, ReputationError> {
    let mut value = 0.0;
    for (field, d) in denominators {
        let d = match (policy, d) {
            (ZeroDenominatorPolicy::Strict, 0) => {
                return Err(ReputationError::ZeroDenominator {
                    node,
                    platform: platform.clone(),
                    field,
                })
            }
            (ZeroDenominatorPolicy::Clamp, d) => d.max(1),
            (_, d) => d,
        };
        value += numerator as f64 / d as f64;
    }
    Ok(value)
}

pub fn follower_reputation(
    m: &FollowerMetrics,
    policy: ZeroDenominatorPolicy,
) -> Result<RawScore, ReputationError> {
    let value = ratio_sum(
        m.followers,
        [("posts", m.posts), ("following", m.following)],
        m.node,
        &m.platform,
        policy,
    )?;
    Ok(RawScore {
        node: m.node,
        platform: m.platform.clone(),
        value,
    })
}

pub fn endorsement_reputation(
    m: &EndorsementMetrics,
    policy: ZeroDenominatorPolicy,
) -> Result<RawScore, ReputationError> {
    let value = ratio_sum(
        m.endorsements,
        [("connections", m.connections), ("skills", m.skills)],
        m.node,
        &m.platform,
        policy,
    )?;
    Ok(RawScore {
        node: m.node,
        platform: m.platform.clone(),
        value,
    })
}

/// Scores every record, keeping input order.
pub fn score_all(
    metrics: &[PlatformMetrics],
    policy: ZeroDenominatorPolicy,
    exec: Execution,
) -> Result<Vec<RawScore>, ReputationError> {
    exec.try_map(metrics, |m| m.score(policy))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    /// Divide by the platform maximum. Zeros stay zero.
    #[default]
    Max,
    /// `(v - min) / (max - min)`; a constant platform maps to all zeros.
    MinMax,
}

impl FromStr for NormalizationMode {
    type Err = ReputationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max" => Ok(NormalizationMode::Max),
            "minmax" | "min-max" => Ok(NormalizationMode::MinMax),
            other => Err(ReputationError::UnknownNormalization(other.to_string())),
        }
    }
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalizationMode::Max => "max",
            NormalizationMode::MinMax => "minmax",
        })
    }
}

/// Max-scaling of one platform's scores into `[0, 1]`.
pub fn normalize_platform(scores: &[RawScore]) -> Result<Vec<NormalizedScore>, ReputationError> {
    normalize_platform_with(scores, NormalizationMode::Max)
}

pub fn normalize_platform_with(
    scores: &[RawScore],
    mode: NormalizationMode,
) -> Result<Vec<NormalizedScore>, ReputationError> {
    let first = scores.first().ok_or(ReputationError::EmptyInput)?;
    if let Some(other) = scores.iter().find(|s| s.platform != first.platform) {
        return Err(ReputationError::MixedPlatform {
            expected: first.platform.clone(),
            found: other.platform.clone(),
        });
    }
    let max = scores
        .iter()
        .map(|s| s.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let min = scores.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    let scale = |v: f64| -> f64 {
        match mode {
            NormalizationMode::Max if max > 0.0 => (v / max).clamp(0.0, 1.0),
            NormalizationMode::MinMax if max > min => ((v - min) / (max - min)).clamp(0.0, 1.0),
            _ => 0.0,
        }
    };
    Ok(scores
        .iter()
        .map(|s| NormalizedScore {
            node: s.node,
            platform: s.platform.clone(),
            value: scale(s.value),
        })
        .collect())
}

/// Sums each roster node's normalized scores across platforms. Missing
/// entries contribute 0. Sorted by value descending, then id ascending.
pub fn total_reputation(
    per_platform: &BTreeMap<Platform, Vec<NormalizedScore>>,
    roster: &Roster,
) -> Vec<TotalReputation> {
    let mut components: BTreeMap<NodeId, BTreeMap<Platform, NormalizedScore>> =
        roster.ids().map(|id| (id, BTreeMap::new())).collect();
    for (platform, scores) in per_platform {
        for s in scores {
            if let Some(slot) = components.get_mut(&s.node) {
                slot.insert(platform.clone(), s.clone());
            }
        }
    }
    let mut totals: Vec<TotalReputation> = components
        .into_iter()
        .map(|(node, components)| TotalReputation {
            node,
            value: components.values().map(|s| s.value).sum(),
            components,
        })
        .collect();
    totals.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.node.cmp(&b.node)));
    totals
}

/// Result of checking the additive fusion model for one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub node: NodeId,
    pub total: f64,
    pub known_sum: f64,
    /// `total - known_sum`: the mass the unknown platforms must account for.
    pub residual: f64,
    pub unknown_platforms: usize,
    /// True when `0 <= residual <= unknown_platforms` (up to rounding slack).
    pub within_bounds: bool,
}

/// Rounding slack for the bound check on residuals.
pub const RESIDUAL_SLACK: f64 = 1e-9;

/// Checks published (or computed) totals against partially known
/// per-platform components under the additive model. Every normalized
/// score lies in `[0, 1]`, so the residual must lie in
/// `[0, #unknown platforms]`.
pub fn validate_additive_model(
    totals: &[TotalReputation],
    known_components: &BTreeMap<NodeId, BTreeMap<Platform, f64>>,
    platform_count: usize,
) -> Vec<ResidualRecord> {
    totals
        .iter()
        .map(|t| {
            let known = known_components.get(&t.node);
            let known_sum: f64 = known.map(|k| k.values().sum()).unwrap_or(0.0);
            let known_count = known.map_or(0, BTreeMap::len);
            let unknown_platforms = platform_count.saturating_sub(known_count);
            let residual = t.value - known_sum;
            ResidualRecord {
                node: t.node,
                total: t.value,
                known_sum,
                residual,
                unknown_platforms,
                within_bounds: residual >= -RESIDUAL_SLACK
                    && residual <= unknown_platforms as f64 + RESIDUAL_SLACK,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::id;

    fn tw() -> Platform {
        Platform::new("twitter").unwrap()
    }

    fn fm(followers: u64, posts: u64, following: u64) -> FollowerMetrics {
        FollowerMetrics {
            node: id(1),
            platform: tw(),
            followers,
            posts,
            following,
        }
    }

    fn em(endorsements: u64, connections: u64, skills: u64) -> EndorsementMetrics {
        EndorsementMetrics {
            node: id(1),
            platform: Platform::new("linkedin").unwrap(),
            endorsements,
            connections,
            skills,
        }
    }

    fn raw(values: &[f64]) -> Vec<RawScore> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| RawScore {
                node: id(i as u32 + 1),
                platform: tw(),
                value: v,
            })
            .collect()
    }

    use ZeroDenominatorPolicy::{Clamp, Strict};

    #[test]
    fn follower_formula() {
        assert_eq!(
            follower_reputation(&fm(100, 50, 25), Strict).unwrap().value,
            6.0
        );
        assert_eq!(
            follower_reputation(&fm(0, 10, 10), Strict).unwrap().value,
            0.0
        );
        assert_eq!(
            follower_reputation(&fm(50, 0, 25), Clamp).unwrap().value,
            52.0
        );
        assert_eq!(
            follower_reputation(&fm(50, 0, 25), Strict),
            Err(ReputationError::ZeroDenominator {
                node: id(1),
                platform: tw(),
                field: "posts"
            })
        );
        assert!(matches!(
            follower_reputation(&fm(50, 3, 0), Strict),
            Err(ReputationError::ZeroDenominator {
                field: "following",
                ..
            })
        ));
    }

    #[test]
    fn endorsement_formula() {
        let v = endorsement_reputation(&em(30, 150, 10), Strict)
            .unwrap()
            .value;
        assert!((v - 3.2).abs() < 1e-12);
        assert_eq!(
            endorsement_reputation(&em(0, 7, 3), Strict).unwrap().value,
            0.0
        );
        assert_eq!(
            endorsement_reputation(&em(4, 0, 2), Clamp).unwrap().value,
            6.0
        );
        assert!(matches!(
            endorsement_reputation(&em(4, 0, 2), Strict),
            Err(ReputationError::ZeroDenominator {
                field: "connections",
                ..
            })
        ));
    }

    #[test]
    fn dispatch_on_shape() {
        let f: PlatformMetrics = fm(100, 50, 25).into();
        let e: PlatformMetrics = em(30, 150, 10).into();
        assert_eq!(f.score(Clamp).unwrap().value, 6.0);
        assert!((e.score(Clamp).unwrap().value - 3.2).abs() < 1e-12);
    }

    #[test]
    fn normalize_cases() {
        let out = normalize_platform(&raw(&[6.0, 3.0, 0.0])).unwrap();
        let values: Vec<f64> = out.iter().map(|s| s.value).collect();
        assert_eq!(values, vec![1.0, 0.5, 0.0]);

        let zeros = normalize_platform(&raw(&[0.0, 0.0])).unwrap();
        assert!(zeros.iter().all(|s| s.value == 0.0));

        assert_eq!(normalize_platform(&[]), Err(ReputationError::EmptyInput));

        let mut mixed = raw(&[1.0, 2.0]);
        mixed[1].platform = Platform::new("instagram").unwrap();
        assert!(matches!(
            normalize_platform(&mixed),
            Err(ReputationError::MixedPlatform { .. })
        ));
    }

    #[test]
    fn minmax_mode() {
        let out =
            normalize_platform_with(&raw(&[2.0, 4.0, 6.0]), NormalizationMode::MinMax).unwrap();
        let values: Vec<f64> = out.iter().map(|s| s.value).collect();
        assert_eq!(values, vec![0.0, 0.5, 1.0]);
        let flat = normalize_platform_with(&raw(&[3.0, 3.0]), NormalizationMode::MinMax).unwrap();
        assert!(flat.iter().all(|s| s.value == 0.0));
    }

    #[test]
    fn totals_with_missing_platforms() {
        let roster = Roster::numbered(3).unwrap();
        let mut per = BTreeMap::new();
        per.insert(
            tw(),
            vec![NormalizedScore {
                node: id(2),
                platform: tw(),
                value: 0.7,
            }],
        );
        let totals = total_reputation(&per, &roster);
        assert_eq!(totals.len(), 3);
        assert_eq!(totals[0].node, id(2));
        assert_eq!(totals[0].value, 0.7);
        assert_eq!(totals[1].node, id(1));
        assert_eq!(totals[1].value, 0.0);
        assert!(totals[1].components.is_empty());
        assert_eq!(totals[2].node, id(3));
    }

    #[test]
    fn policy_and_mode_parse() {
        assert_eq!("STRICT".parse::<ZeroDenominatorPolicy>(), Ok(Strict));
        assert_eq!("clamp".parse::<ZeroDenominatorPolicy>(), Ok(Clamp));
        assert!("lenient".parse::<ZeroDenominatorPolicy>().is_err());
        assert_eq!(
            "minmax".parse::<NormalizationMode>(),
            Ok(NormalizationMode::MinMax)
        );
        assert!(Platform::new("Twitter").unwrap() == tw());
        assert!(Platform::new("").is_err());
        assert!(Platform::new("a b").is_err());
    }

    #[test]
    fn negative_residual_flagged() {
        let t = TotalReputation {
            node: id(4),
            value: 0.5,
            components: BTreeMap::new(),
        };
        let mut known = BTreeMap::new();
        known.insert(id(4), BTreeMap::from([(tw(), 0.8)]));
        let r = &validate_additive_model(&[t], &known, 3)[0];
        assert!(r.residual < 0.0);
        assert!(!r.within_bounds);
        assert_eq!(r.unknown_platforms, 2);
    }
}
