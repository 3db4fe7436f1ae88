use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orgknow::io::{ConfigFile, PipelineConfig, CONFIG_ENV};
use orgknow::pipeline::{
    analyze, graph_files, load_inputs, report_files, write_outputs, Analysis, Inputs, EXIT_INPUT,
};
use orgknow::report::Density;
use orgknow::reputation::NormalizationMode;
use orgknow::{top_k, Execution, PipelineError, RankKey, ZeroDenominatorPolicy};

#[derive(Debug, Parser)]
#[command(
    name = "orgknow",
    version,
    about = "Knowledge networks from peer-ranking ballots, fused with social reputation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every stage and write all reports and graph files.
    #[command(alias = "run-pipeline")]
    Run(Common),
    /// Build the knowledge network and print its size and density.
    Build(Common),
    /// Print the degree centrality table.
    Centrality(Common),
    /// Print normalized per-platform and total reputation.
    Reputation(Common),
    /// Write report.json and report.csv.
    Combine(Common),
    /// Write one network file per export format.
    Export(Common),
    /// Validate every input without writing anything.
    Check(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[arg(long)]
    roster: Option<PathBuf>,
    #[arg(long)]
    ballots: Option<PathBuf>,
    /// Platform metrics file as <platform>=<path>; repeatable.
    #[arg(long, value_name = "PLATFORM=PATH")]
    metrics: Vec<String>,
    /// Rank weights, highest first, e.g. 10,9,8,7,6,5,4,3,2,1.
    #[arg(long, value_delimiter = ',', value_name = "W1,W2,...")]
    scheme: Option<Vec<f64>>,
    /// Zero-denominator handling.
    #[arg(long, value_name = "strict|clamp")]
    policy: Option<ZeroDenominatorPolicy>,
    #[arg(long, value_name = "max|minmax")]
    normalization: Option<NormalizationMode>,
    /// Export formats: graphml,dot,json,csv.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print only the first k rows.
    #[arg(long, value_name = "K")]
    top: Option<usize>,
    /// Ranking used by --top: total_reputation, weighted_degree, degree or platform:<name>.
    #[arg(long, default_value = "total_reputation")]
    by: RankKey,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug)]
enum Failure {
    Pipeline(PipelineError),
    Stdout(io::Error),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::Pipeline(e)
    }
}

impl From<orgknow::io::ConfigError> for Failure {
    fn from(e: orgknow::io::ConfigError) -> Self {
        Failure::Pipeline(e.into())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Stdout(e)
    }
}

impl Common {
    fn config(&self) -> Result<PipelineConfig, Failure> {
        let base = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let mut flags = ConfigFile {
            roster_path: self.roster.clone(),
            ballots_path: self.ballots.clone(),
            weight_scheme: self.scheme.clone(),
            zero_denominator_policy: self.policy,
            normalization: self.normalization,
            output_dir: self.out.clone(),
            export_formats: self.format.clone(),
            ..Default::default()
        };
        for spec in &self.metrics {
            flags.add_metrics_flag(spec)?;
        }
        Ok(flags.over(base).resolve()?)
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    fn limit(&self, len: usize) -> usize {
        self.top.unwrap_or(len).min(len)
    }
}

fn prepare(args: &Common) -> Result<(PipelineConfig, Inputs, Analysis), Failure> {
    let cfg = args.config()?;
    let inputs = load_inputs(&cfg)?;
    let analysis = analyze(&inputs, &cfg, args.exec())?;
    Ok((cfg, inputs, analysis))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn print_written(out: &mut impl Write, files: &[PathBuf]) -> io::Result<()> {
    for f in files {
        writeln!(out, "wrote {}", f.display())?;
    }
    Ok(())
}

fn print_top(out: &mut impl Write, args: &Common, analysis: &Analysis) -> io::Result<()> {
    let Some(k) = args.top else { return Ok(()) };
    writeln!(
        out,
        "rank,node,name,total_reputation,weighted_degree,rank_delta"
    )?;
    for (i, r) in top_k(&analysis.report, k, &args.by).iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{:.3},{:.3},{}",
            i + 1,
            r.node,
            csv_field(&r.name),
            r.total_reputation,
            r.weighted_degree,
            r.rank_delta
        )?;
    }
    Ok(())
}

fn execute(command: &Command, out: &mut impl Write) -> Result<(), Failure> {
    match command {
        Command::Run(args) => {
            let (cfg, _, analysis) = prepare(args)?;
            let mut files = report_files(&analysis.report)?;
            files.extend(graph_files(
                &analysis.graph,
                &analysis.report,
                &cfg.export_formats,
            )?);
            print_written(out, &write_outputs(&cfg.output_dir, &files)?)?;
            print_top(out, args, &analysis)?;
        }
        Command::Build(args) => {
            let (_, inputs, analysis) = prepare(args)?;
            let g = &analysis.graph;
            let density = match analysis.report.density {
                Density::Value(d) => format!("{d:.6}"),
                Density::TooFewNodes => "n<2".to_string(),
            };
            writeln!(out, "nodes: {}", g.node_count())?;
            writeln!(out, "ballots: {}", inputs.ballots.len())?;
            writeln!(out, "edges: {}", g.edge_count())?;
            writeln!(out, "total_weight: {}", g.total_weight())?;
            writeln!(out, "density: {density}")?;
        }
        Command::Centrality(args) => {
            let (_, inputs, analysis) = prepare(args)?;
            writeln!(
                out,
                "rank,node,name,in_degree,out_degree,degree,in_weight,out_weight,weighted_degree"
            )?;
            let rows = &analysis.centrality[..args.limit(analysis.centrality.len())];
            for (i, c) in rows.iter().enumerate() {
                let d = analysis
                    .graph
                    .degree(c.node)
                    .expect("centrality node in graph");
                let w = analysis
                    .graph
                    .weighted_degree(c.node)
                    .expect("centrality node in graph");
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    i + 1,
                    c.node,
                    csv_field(inputs.roster.name(c.node).unwrap_or_default()),
                    d.in_degree,
                    d.out_degree,
                    d.total,
                    w.in_weight,
                    w.out_weight,
                    w.total
                )?;
            }
        }
        Command::Reputation(args) => {
            let (_, inputs, analysis) = prepare(args)?;
            let platforms: Vec<_> = inputs.metrics.keys().collect();
            let mut header = String::from("rank,node,name");
            for p in &platforms {
                header.push_str(&format!(",{p}"));
            }
            writeln!(out, "{header},total_reputation")?;
            let totals = &analysis.reputation.totals;
            for (i, t) in totals[..args.limit(totals.len())].iter().enumerate() {
                let mut line = format!(
                    "{},{},{}",
                    i + 1,
                    t.node,
                    csv_field(inputs.roster.name(t.node).unwrap_or_default())
                );
                for p in &platforms {
                    match t.components.get(*p) {
                        Some(s) => line.push_str(&format!(",{:.3}", s.value)),
                        None => line.push_str(",absent"),
                    }
                }
                writeln!(out, "{line},{:.3}", t.value)?;
            }
        }
        Command::Combine(args) => {
            let (cfg, _, analysis) = prepare(args)?;
            let files = write_outputs(&cfg.output_dir, &report_files(&analysis.report)?)?;
            print_written(out, &files)?;
            print_top(out, args, &analysis)?;
        }
        Command::Export(args) => {
            let (cfg, _, analysis) = prepare(args)?;
            let files = graph_files(&analysis.graph, &analysis.report, &cfg.export_formats)?;
            print_written(out, &write_outputs(&cfg.output_dir, &files)?)?;
        }
        Command::Check(args) => {
            let (_, inputs, analysis) = prepare(args)?;
            writeln!(
                out,
                "ok: {} employees, {} ballots, {} edges",
                inputs.roster.len(),
                inputs.ballots.len(),
                analysis.graph.edge_count()
            )?;
            for (p, rows) in &inputs.metrics {
                writeln!(out, "ok: {p}: {} accounts", rows.len())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(&cli.command, &mut out).and_then(|()| out.flush().map_err(Failure::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Pipeline(e)) => {
            eprintln!("orgknow: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Stdout(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Stdout(e)) => {
            eprintln!("orgknow: error: writing output: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
