//! The batch pipeline, from input CSVs to reports and graph files.
//!
//! The stages are public so the CLI subcommands can stop after any of them
//! and still produce exactly what a full run would.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ballots::{
    build_knowledge_graph_with, centrality_table_with, Ballot, BallotError, CentralityRecord,
    Roster,
};
use crate::exec::Execution;
use crate::graph::DirectedWeightedGraph;
use crate::io::{
    detect_metrics_kind, export_graph, parse_ballots, parse_endorsement_metrics,
    parse_follower_metrics, parse_roster, AttrValue, ConfigError, ExportError, ExportFormat,
    InputError, MetricsKind, NodeAttributes, PipelineConfig,
};
use crate::report::{combined_report, AnalysisReport, PlatformScore, ReportError, RunSettings};
use crate::reputation::{
    normalize_platform_with, score_all, total_reputation, NormalizedScore, Platform,
    PlatformMetrics, RawScore, ReputationError, TotalReputation,
};

/// Exit code for unreadable input or bad configuration.
pub const EXIT_INPUT: i32 = 1;
/// Exit code for well-formed data that breaks a validation rule.
pub const EXIT_VALIDATION: i32 = 2;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: InputError,
    },
    #[error("{}: {source}", path.display())]
    Ballots {
        path: PathBuf,
        #[source]
        source: BallotError,
    },
    #[error("{}: {source}", path.display())]
    Reputation {
        path: PathBuf,
        #[source]
        source: ReputationError,
    },
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("writing {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Input { source, .. } if source.is_validation() => EXIT_VALIDATION,
            PipelineError::Ballots { .. }
            | PipelineError::Reputation { .. }
            | PipelineError::Report(_) => EXIT_VALIDATION,
            _ => EXIT_INPUT,
        }
    }
}

/// Parsed and validated input files.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub roster: Roster,
    pub ballots: Vec<Ballot>,
    pub metrics: BTreeMap<Platform, Vec<PlatformMetrics>>,
    metric_paths: BTreeMap<Platform, PathBuf>,
}

fn read(path: &Path) -> Result<Vec<u8>, PipelineError> {
    fs::read(path).map_err(|source| PipelineError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn in_file<T>(path: &Path, r: Result<T, InputError>) -> Result<T, PipelineError> {
    r.map_err(|source| PipelineError::Input {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_inputs(config: &PipelineConfig) -> Result<Inputs, PipelineError> {
    let roster = in_file(
        &config.roster_path,
        parse_roster(read(&config.roster_path)?.as_slice()),
    )?;
    let ballots = in_file(
        &config.ballots_path,
        parse_ballots(
            read(&config.ballots_path)?.as_slice(),
            &roster,
            &config.weight_scheme,
        ),
    )?;

    let entries: Vec<_> = config.metrics.iter().collect();
    let parsed = Execution::default().try_map(&entries, |(platform, input)| {
        let data = read(&input.path)?;
        let kind = match input.kind {
            MetricsKind::Detect => in_file(&input.path, detect_metrics_kind(&data))?,
            kind => kind,
        };
        let records: Vec<PlatformMetrics> = match kind {
            MetricsKind::Endorsement => in_file(
                &input.path,
                parse_endorsement_metrics(data.as_slice(), &roster, platform),
            )?
            .into_iter()
            .map(Into::into)
            .collect(),
            _ => in_file(
                &input.path,
                parse_follower_metrics(data.as_slice(), &roster, platform),
            )?
            .into_iter()
            .map(Into::into)
            .collect(),
        };
        Ok::<_, PipelineError>(((*platform).clone(), records))
    })?;

    Ok(Inputs {
        roster,
        ballots,
        metrics: parsed.into_iter().collect(),
        metric_paths: config
            .metrics
            .iter()
            .map(|(p, m)| (p.clone(), m.path.clone()))
            .collect(),
    })
}

pub fn build_graph(
    inputs: &Inputs,
    config: &PipelineConfig,
    exec: Execution,
) -> Result<DirectedWeightedGraph, PipelineError> {
    build_knowledge_graph_with(&inputs.ballots, &inputs.roster, &config.weight_scheme, exec)
        .map_err(|source| PipelineError::Ballots {
            path: config.ballots_path.clone(),
            source,
        })
}

/// Per-platform scores at each step of the reputation stage.
#[derive(Debug, Clone)]
pub struct ReputationScores {
    pub raw: BTreeMap<Platform, Vec<RawScore>>,
    pub normalized: BTreeMap<Platform, Vec<NormalizedScore>>,
    pub totals: Vec<TotalReputation>,
}

pub fn score_reputation(
    inputs: &Inputs,
    config: &PipelineConfig,
    exec: Execution,
) -> Result<ReputationScores, PipelineError> {
    let mut raw = BTreeMap::new();
    let mut normalized = BTreeMap::new();
    for (platform, metrics) in &inputs.metrics {
        let path = inputs
            .metric_paths
            .get(platform)
            .cloned()
            .unwrap_or_default();
        let for_file = |source| PipelineError::Reputation {
            path: path.clone(),
            source,
        };
        let scores = score_all(metrics, config.zero_denominator_policy, exec).map_err(for_file)?;
        // a platform nobody has an account on contributes nothing
        if !scores.is_empty() {
            normalized.insert(
                platform.clone(),
                normalize_platform_with(&scores, config.normalization).map_err(for_file)?,
            );
        }
        raw.insert(platform.clone(), scores);
    }
    let totals = total_reputation(&normalized, &inputs.roster);
    Ok(ReputationScores {
        raw,
        normalized,
        totals,
    })
}

pub fn run_settings(config: &PipelineConfig) -> RunSettings {
    RunSettings {
        weight_scheme: config.weight_scheme.weights().to_vec(),
        zero_denominator_policy: config.zero_denominator_policy,
        normalization: config.normalization,
        platforms: config.metrics.keys().cloned().collect(),
    }
}

/// Everything computed by a run, before serialization.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub graph: DirectedWeightedGraph,
    pub centrality: Vec<CentralityRecord>,
    pub reputation: ReputationScores,
    pub report: AnalysisReport,
}

pub fn analyze(
    inputs: &Inputs,
    config: &PipelineConfig,
    exec: Execution,
) -> Result<Analysis, PipelineError> {
    let graph = build_graph(inputs, config, exec)?;
    let centrality = centrality_table_with(&graph, exec);
    let reputation = score_reputation(inputs, config, exec)?;
    let report = combined_report(
        &graph,
        &reputation.totals,
        &inputs.roster,
        run_settings(config),
    )?;
    Ok(Analysis {
        graph,
        centrality,
        reputation,
        report,
    })
}

/// A named output, not yet on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn fixed3(v: f64) -> String {
    format!("{v:.3}")
}

/// `report.csv`: ranked rows, numbers at three decimals.
pub fn report_csv(report: &AnalysisReport) -> Result<Vec<u8>, PipelineError> {
    let to_err = |e: csv::Error| PipelineError::Write {
        path: PathBuf::from("report.csv"),
        source: e.into(),
    };
    let platforms = &report.generated_with.platforms;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "reputation_rank",
        "node",
        "name",
        "degree",
        "weighted_degree",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(platforms.iter().map(|p| p.to_string()));
    header.extend(["total_reputation", "centrality_rank", "rank_delta"].map(String::from));
    w.write_record(&header).map_err(to_err)?;
    for r in &report.records {
        let mut row = vec![
            r.reputation_rank.to_string(),
            r.node.to_string(),
            r.name.clone(),
            r.degree.to_string(),
            fixed3(r.weighted_degree),
        ];
        row.extend(platforms.iter().map(|p| match r.platform_scores.get(p) {
            Some(PlatformScore::Score(v)) => fixed3(*v),
            _ => "absent".to_string(),
        }));
        row.extend([
            fixed3(r.total_reputation),
            r.centrality_rank.to_string(),
            r.rank_delta.to_string(),
        ]);
        w.write_record(&row).map_err(to_err)?;
    }
    w.into_inner().map_err(|e| PipelineError::Write {
        path: PathBuf::from("report.csv"),
        source: e.into_error(),
    })
}

pub fn report_json(report: &AnalysisReport) -> Result<Vec<u8>, PipelineError> {
    let mut bytes = serde_json::to_vec_pretty(report).map_err(ExportError::from)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn report_files(report: &AnalysisReport) -> Result<Vec<OutputFile>, PipelineError> {
    Ok(vec![
        OutputFile {
            name: "report.json".into(),
            bytes: report_json(report)?,
        },
        OutputFile {
            name: "report.csv".into(),
            bytes: report_csv(report)?,
        },
    ])
}

/// Node attributes carried into exported graphs.
pub fn node_attributes(report: &AnalysisReport) -> NodeAttributes {
    report
        .records
        .iter()
        .map(|r| {
            let mut attrs = BTreeMap::from([
                ("name".to_string(), AttrValue::Text(r.name.clone())),
                ("degree".to_string(), AttrValue::Number(r.degree as f64)),
                (
                    "weighted_degree".to_string(),
                    AttrValue::Number(r.weighted_degree),
                ),
                (
                    "total_reputation".to_string(),
                    AttrValue::Number(r.total_reputation),
                ),
                ("size".to_string(), AttrValue::Number(r.size_attribute)),
            ]);
            for (p, score) in &r.platform_scores {
                if let PlatformScore::Score(v) = score {
                    attrs.insert(format!("{p}_reputation"), AttrValue::Number(*v));
                }
            }
            (r.node, attrs)
        })
        .collect()
}

pub fn graph_files(
    graph: &DirectedWeightedGraph,
    report: &AnalysisReport,
    formats: &[ExportFormat],
) -> Result<Vec<OutputFile>, PipelineError> {
    let attrs = node_attributes(report);
    formats
        .iter()
        .map(|&format| {
            let exported = export_graph(graph, &attrs, format)?;
            Ok(OutputFile {
                name: format!("network.{}", format.extension()),
                bytes: exported.bytes,
            })
        })
        .collect()
}

pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(dir).map_err(|source| PipelineError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    files
        .iter()
        .map(|f| {
            let path = dir.join(&f.name);
            fs::write(&path, &f.bytes).map_err(|source| PipelineError::Write {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: AnalysisReport,
    pub files: Vec<PathBuf>,
}

/// Full run: parse, score, fuse, then write `report.json`, `report.csv`
/// and one `network.<ext>` per configured format into the output dir.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    run_pipeline_with(config, Execution::default())
}

pub fn run_pipeline_with(
    config: &PipelineConfig,
    exec: Execution,
) -> Result<PipelineOutput, PipelineError> {
    let inputs = load_inputs(config)?;
    let analysis = analyze(&inputs, config, exec)?;
    let mut files = report_files(&analysis.report)?;
    files.extend(graph_files(
        &analysis.graph,
        &analysis.report,
        &config.export_formats,
    )?);
    let written = write_outputs(&config.output_dir, &files)?;
    Ok(PipelineOutput {
        report: analysis.report,
        files: written,
    })
}
