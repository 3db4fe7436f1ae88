//! CSV readers for the roster, ballots and platform metrics.
//!
//! Every file has a mandatory header row. Parsing is total: a row is either
//! accepted or rejected with its line number, never skipped.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io::Read;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::config::MetricsKind;
use super::InputError;
use crate::ballots::{validate_ballot, Ballot, BallotError, Roster, WeightScheme};
use crate::graph::NodeId;
use crate::reputation::{EndorsementMetrics, FollowerMetrics, Platform};

const ROSTER_HEADER: [&str; 2] = ["id", "name"];
const BALLOT_HEADER: [&str; 3] = ["respondent_id", "rank", "target_id"];
const FOLLOWER_HEADER: [&str; 4] = ["node_id", "followers", "posts", "following"];
const ENDORSEMENT_HEADER: [&str; 4] = ["node_id", "endorsements", "connections", "skills"];

/// A data row with its source line.
struct Row {
    line: u64,
    record: StringRecord,
}

fn csv_error(e: csv::Error) -> InputError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => InputError::Io(io),
        kind => InputError::Csv {
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Reads all rows after checking the header matches `expected` exactly.
fn read_rows<R: Read>(reader: R, expected: &[&str]) -> Result<Vec<Row>, InputError> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let found: Vec<&str> = header
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}'))
        .collect();
    if found != expected {
        return Err(InputError::Header {
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    let mut rows = Vec::new();
    for result in rdr.records() {
        let record = result.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() < expected.len() {
            return Err(InputError::MalformedRow {
                line,
                message: format!("missing column `{}`", expected[record.len()]),
            });
        }
        if record.len() > expected.len() {
            return Err(InputError::MalformedRow {
                line,
                message: format!("expected {} fields, found {}", expected.len(), record.len()),
            });
        }
        rows.push(Row { line, record });
    }
    Ok(rows)
}

fn parse_id(row: &Row, col: usize, column: &str) -> Result<NodeId, InputError> {
    let raw = &row.record[col];
    raw.parse::<u32>()
        .ok()
        .and_then(|n| NodeId::new(n).ok())
        .ok_or_else(|| InputError::MalformedRow {
            line: row.line,
            message: format!("column `{column}`: `{raw}` is not a positive integer id"),
        })
}

fn parse_count(row: &Row, col: usize, column: &'static str) -> Result<u64, InputError> {
    let raw = &row.record[col];
    let value: i128 = raw.parse().map_err(|_| InputError::MalformedRow {
        line: row.line,
        message: format!("column `{column}`: `{raw}` is not an integer"),
    })?;
    if value < 0 {
        return Err(InputError::NegativeCount {
            line: row.line,
            column,
            value,
        });
    }
    u64::try_from(value).map_err(|_| InputError::MalformedRow {
        line: row.line,
        message: format!("column `{column}`: `{raw}` is out of range"),
    })
}

/// `id,name` roster file.
pub fn parse_roster<R: Read>(reader: R) -> Result<Roster, InputError> {
    let rows = read_rows(reader, &ROSTER_HEADER)?;
    let mut entries = BTreeMap::new();
    let mut lines: BTreeMap<NodeId, u64> = BTreeMap::new();
    for row in &rows {
        let id = parse_id(row, 0, "id")?;
        match lines.entry(id) {
            Entry::Occupied(first) => {
                return Err(InputError::DuplicateId {
                    id,
                    first_line: *first.get(),
                    line: row.line,
                })
            }
            Entry::Vacant(slot) => {
                slot.insert(row.line);
            }
        }
        entries.insert(id, row.record[1].to_string());
    }
    Roster::new(entries).map_err(|_| InputError::EmptyRoster)
}

/// Long-format ballots, `respondent_id,rank,target_id`.
///
/// Rows are grouped by respondent and ordered by rank; ranks must form the
/// prefix `1..=L`. Ballots come back ordered by respondent id.
pub fn parse_ballots<R: Read>(
    reader: R,
    roster: &Roster,
    scheme: &WeightScheme,
) -> Result<Vec<Ballot>, InputError> {
    struct Vote {
        rank: usize,
        target: NodeId,
        line: u64,
    }

    let rows = read_rows(reader, &BALLOT_HEADER)?;
    let mut grouped: BTreeMap<NodeId, Vec<Vote>> = BTreeMap::new();
    for row in &rows {
        let respondent = parse_id(row, 0, "respondent_id")?;
        let raw_rank = &row.record[1];
        let rank = raw_rank
            .parse::<usize>()
            .ok()
            .filter(|&r| r >= 1)
            .ok_or_else(|| InputError::MalformedRow {
                line: row.line,
                message: format!("column `rank`: `{raw_rank}` is not a rank >= 1"),
            })?;
        let target = parse_id(row, 2, "target_id")?;
        if !roster.contains(respondent) {
            return Err(InputError::UnknownNode {
                line: row.line,
                id: respondent,
            });
        }
        if rank > scheme.k() {
            return Err(InputError::Ballot {
                line: row.line,
                source: BallotError::OverlongBallot {
                    respondent,
                    len: rank,
                    max: scheme.k(),
                },
            });
        }
        grouped.entry(respondent).or_default().push(Vote {
            rank,
            target,
            line: row.line,
        });
    }

    let mut ballots = Vec::with_capacity(grouped.len());
    for (respondent, mut votes) in grouped {
        votes.sort_by_key(|v| (v.rank, v.line));
        for pair in votes.windows(2) {
            if pair[0].rank == pair[1].rank {
                return Err(InputError::DuplicateRank {
                    line: pair[1].line,
                    respondent,
                    rank: pair[1].rank,
                    first_line: pair[0].line,
                });
            }
        }
        for (expected, vote) in (1..).zip(&votes) {
            if vote.rank != expected {
                return Err(InputError::RankGap {
                    line: vote.line,
                    respondent,
                    missing: expected,
                });
            }
        }
        let lines: Vec<u64> = votes.iter().map(|v| v.line).collect();
        let ballot = Ballot::new(respondent, votes.iter().map(|v| v.target).collect());
        let ballot = validate_ballot(ballot, roster, scheme).map_err(|source| {
            let position = match &source {
                BallotError::SelfVote { position, .. }
                | BallotError::DuplicateTarget { position, .. } => Some(*position),
                BallotError::UnknownNode { position, .. } => *position,
                _ => None,
            };
            InputError::Ballot {
                line: position.map_or(lines[0], |p| lines[p]),
                source,
            }
        })?;
        ballots.push(ballot);
    }
    Ok(ballots)
}

fn metric_rows<R, T, F>(
    reader: R,
    roster: &Roster,
    header: &[&'static str; 4],
    build: F,
) -> Result<Vec<T>, InputError>
where
    R: Read,
    F: Fn(NodeId, [u64; 3]) -> T,
{
    let rows = read_rows(reader, header)?;
    let mut seen: BTreeMap<NodeId, u64> = BTreeMap::new();
    let mut out = Vec::with_capacity(rows.len());
    let columns = [header[1], header[2], header[3]];
    for row in &rows {
        let node = parse_id(row, 0, "node_id")?;
        let counts = [
            parse_count(row, 1, columns[0])?,
            parse_count(row, 2, columns[1])?,
            parse_count(row, 3, columns[2])?,
        ];
        if !roster.contains(node) {
            return Err(InputError::UnknownNode {
                line: row.line,
                id: node,
            });
        }
        if let Some(&first_line) = seen.get(&node) {
            return Err(InputError::DuplicateId {
                id: node,
                first_line,
                line: row.line,
            });
        }
        seen.insert(node, row.line);
        out.push(build(node, counts));
    }
    Ok(out)
}

/// `node_id,followers,posts,following`. Employees without an account are
/// simply omitted from the file.
pub fn parse_follower_metrics<R: Read>(
    reader: R,
    roster: &Roster,
    platform: &Platform,
) -> Result<Vec<FollowerMetrics>, InputError> {
    metric_rows(
        reader,
        roster,
        &FOLLOWER_HEADER,
        |node, [followers, posts, following]| FollowerMetrics {
            node,
            platform: platform.clone(),
            followers,
            posts,
            following,
        },
    )
}

/// `node_id,endorsements,connections,skills`.
pub fn parse_endorsement_metrics<R: Read>(
    reader: R,
    roster: &Roster,
    platform: &Platform,
) -> Result<Vec<EndorsementMetrics>, InputError> {
    metric_rows(
        reader,
        roster,
        &ENDORSEMENT_HEADER,
        |node, [endorsements, connections, skills]| EndorsementMetrics {
            node,
            platform: platform.clone(),
            endorsements,
            connections,
            skills,
        },
    )
}

/// Picks the metrics shape from a file's header row.
pub fn detect_metrics_kind(data: &[u8]) -> Result<MetricsKind, InputError> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .from_reader(data);
    let header = rdr.headers().map_err(csv_error)?;
    let found: Vec<&str> = header
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}'))
        .collect();
    if found == FOLLOWER_HEADER {
        Ok(MetricsKind::Follower)
    } else if found == ENDORSEMENT_HEADER {
        Ok(MetricsKind::Endorsement)
    } else {
        Err(InputError::Header {
            expected: format!(
                "{} or {}",
                FOLLOWER_HEADER.join(","),
                ENDORSEMENT_HEADER.join(",")
            ),
            found: found.join(","),
        })
    }
}
