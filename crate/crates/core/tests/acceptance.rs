//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{id, random_attributes, rng, write_synthetic_dataset, Matrix};
use orgknow::io::{export_graph, import_graph, ConfigFile, ExportFormat};
use orgknow::{
    build_knowledge_graph, default_scheme, endorsement_reputation, follower_reputation,
    normalize_platform, run_pipeline, total_reputation, validate_additive_model, Ballot,
    DirectedWeightedGraph, EndorsementMetrics, FollowerMetrics, NormalizedScore, Platform,
    RawScore, Roster, TotalReputation, WeightedEdge, ZeroDenominatorPolicy,
};
use rand::Rng;

const STRICT: ZeroDenominatorPolicy = ZeroDenominatorPolicy::Strict;

fn platform(p: &str) -> Platform {
    Platform::new(p).unwrap()
}

fn follower(followers: u64, posts: u64, following: u64) -> f64 {
    let m = FollowerMetrics {
        node: id(1),
        platform: platform("twitter"),
        followers,
        posts,
        following,
    };
    follower_reputation(&m, STRICT).unwrap().value
}

fn endorsement(endorsements: u64, connections: u64, skills: u64) -> f64 {
    let m = EndorsementMetrics {
        node: id(1),
        platform: platform("linkedin"),
        endorsements,
        connections,
        skills,
    };
    endorsement_reputation(&m, STRICT).unwrap().value
}

fn ac1_formula_exactness() {
    assert!((follower(100, 50, 25) - 6.0).abs() <= 1e-12);
    assert!((endorsement(30, 150, 10) - 3.2).abs() <= 1e-12);
}

fn ac2_homogeneity() {
    let mut r = rng(2);
    for _ in 0..1000 {
        let (a, b, d) = (
            r.gen_range(0..1_000_000u64),
            r.gen_range(1..1_000_000u64),
            r.gen_range(1..1_000_000u64),
        );
        for c in [2u64, 3, 10] {
            assert!((follower(c * a, c * b, c * d) - follower(a, b, d)).abs() <= 1e-9);
            assert!((endorsement(c * a, c * b, c * d) - endorsement(a, b, d)).abs() <= 1e-9);
        }
    }
}

fn argsort(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

fn ac3_normalization() {
    let mut r = rng(3);
    for case in 0..500 {
        let len = r.gen_range(1..100);
        let values: Vec<f64> = (0..len)
            .map(|_| match case % 10 {
                // every tenth vector is all zeros
                0 => 0.0,
                _ if r.gen_bool(0.2) => 0.0,
                _ => r.gen_range(0.0..1e5),
            })
            .collect();
        let raw: Vec<RawScore> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| RawScore {
                node: id(i as u32 + 1),
                platform: platform("twitter"),
                value: v,
            })
            .collect();
        let out: Vec<f64> = normalize_platform(&raw)
            .unwrap()
            .iter()
            .map(|s| s.value)
            .collect();
        assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(argsort(&out), argsort(&values));
        if values.iter().any(|&v| v > 0.0) {
            assert_eq!(out.iter().cloned().fold(f64::MIN, f64::max), 1.0);
        }
    }
}

/// Published per-platform top-5 values.
fn reported_platform_scores() -> BTreeMap<Platform, Vec<(u32, f64)>> {
    BTreeMap::from([
        (
            platform("twitter"),
            vec![
                (2, 1.000),
                (10, 0.452),
                (24, 0.352),
                (1, 0.280),
                (21, 0.251),
            ],
        ),
        (
            platform("instagram"),
            vec![(8, 1.000), (3, 0.409), (20, 0.241), (44, 0.154), (9, 0.130)],
        ),
        (
            platform("linkedin"),
            vec![(1, 1.000), (26, 0.690), (2, 0.536), (4, 0.414), (22, 0.385)],
        ),
    ])
}

/// Published total-reputation top five.
const REPORTED_TOTALS: [(u32, f64); 5] =
    [(2, 1.567), (1, 1.358), (8, 1.172), (26, 0.790), (22, 0.619)];

fn ac4_reported_tables() {
    let roster = Roster::numbered(48).unwrap();
    let per: BTreeMap<Platform, Vec<NormalizedScore>> = reported_platform_scores()
        .into_iter()
        .map(|(p, rows)| {
            let scores = rows
                .into_iter()
                .map(|(n, v)| NormalizedScore {
                    node: id(n),
                    platform: p.clone(),
                    value: v,
                })
                .collect();
            (p, scores)
        })
        .collect();
    let totals = total_reputation(&per, &roster);
    let reported_nodes: Vec<u32> = REPORTED_TOTALS.iter().map(|t| t.0).collect();
    let restricted: Vec<u32> = totals
        .iter()
        .map(|t| t.node.get())
        .filter(|n| reported_nodes.contains(n))
        .collect();
    assert_eq!(restricted, reported_nodes);
    let top3: Vec<u32> = totals.iter().take(3).map(|t| t.node.get()).collect();
    assert_eq!(top3, vec![2, 1, 8]);

    let published: Vec<TotalReputation> = REPORTED_TOTALS
        .iter()
        .map(|&(n, v)| TotalReputation {
            node: id(n),
            value: v,
            components: BTreeMap::new(),
        })
        .collect();
    let mut known: BTreeMap<_, BTreeMap<Platform, f64>> = BTreeMap::new();
    for (p, rows) in reported_platform_scores() {
        for (n, v) in rows {
            known.entry(id(n)).or_default().insert(p.clone(), v);
        }
    }
    let residuals = validate_additive_model(&published, &known, 3);
    for (node, expected) in [(2, 0.031), (1, 0.078), (8, 0.172)] {
        let r = residuals.iter().find(|r| r.node == id(node)).unwrap();
        assert!(
            (r.residual - expected).abs() <= 1e-3,
            "node {node}: {}",
            r.residual
        );
    }
    assert!(residuals.iter().all(|r| r.within_bounds));

    // filling the unknown component with the residual reproduces the totals
    let ig = platform("instagram");
    let filled = BTreeMap::from([
        (
            platform("twitter"),
            vec![NormalizedScore {
                node: id(2),
                platform: platform("twitter"),
                value: 1.000,
            }],
        ),
        (
            platform("linkedin"),
            vec![NormalizedScore {
                node: id(2),
                platform: platform("linkedin"),
                value: 0.536,
            }],
        ),
        (
            ig.clone(),
            vec![NormalizedScore {
                node: id(2),
                platform: ig,
                value: 0.031,
            }],
        ),
    ]);
    let t = total_reputation(&filled, &roster);
    assert_eq!(t[0].node, id(2));
    assert!((t[0].value - 1.567).abs() <= 1e-9);
}

fn ac5_graph_oracle() {
    let mut r = rng(5);
    for _ in 0..100 {
        let m = Matrix::random(&mut r, 20);
        let g = m.to_graph();
        for (k, &n) in m.ids.iter().enumerate() {
            let d = g.degree(id(n)).unwrap();
            let (inn, out) = m.degree(k);
            assert_eq!((d.in_degree, d.out_degree, d.total), (inn, out, inn + out));
            let wd = g.weighted_degree(id(n)).unwrap();
            let (win, wout) = m.weighted_degree(k);
            assert_eq!(
                (wd.in_weight, wd.out_weight, wd.total),
                (win, wout, win + wout)
            );
        }
        assert_eq!(g.density().ok(), m.density());
    }
}

fn ac6_ballot_invariants() {
    for n in [3u32, 10, 48] {
        // a ballot needs 10 distinct colleagues, so small respondent pools
        // sit inside a roster padded with employees who cast no ballot
        let roster = Roster::numbered(n.max(11)).unwrap();
        let mut ballots = Vec::new();
        let size = roster.len() as u32;
        for s in 0..n {
            let ranking = (1..=10u32).map(|k| id((s + k) % size + 1)).collect();
            ballots.push(Ballot::new(id(s + 1), ranking));
        }
        let g = build_knowledge_graph(&ballots, &roster, &default_scheme()).unwrap();
        assert_eq!(g.edge_count(), 10 * n as usize);
        assert_eq!(g.total_weight(), 55.0 * n as f64);
        for b in &ballots {
            assert_eq!(g.weighted_degree(b.respondent).unwrap().out_weight, 55.0);
        }
    }
}

fn ac7_density_edges() {
    for n in 2..=20u32 {
        let mut g = DirectedWeightedGraph::new();
        for i in 1..=n {
            g.add_node(id(i));
        }
        assert_eq!(g.density().unwrap(), 0.0);
        for s in 1..=n {
            for t in (1..=n).filter(|&t| t != s) {
                g.add_edge(WeightedEdge::new(id(s), id(t), 1.0)).unwrap();
            }
        }
        assert_eq!(g.density().unwrap(), 1.0);
    }
}

fn ac8_round_trip() {
    let mut r = rng(8);
    for i in 0..50 {
        let mut g = Matrix::random(&mut r, 20).to_graph();
        if i % 5 == 4 {
            g = g.symmetrize();
        }
        let attrs = random_attributes(&mut r, &g);
        for format in [ExportFormat::GraphMl, ExportFormat::Json] {
            let out = export_graph(&g, &attrs, format).unwrap();
            let (g2, attrs2) = import_graph(&out.bytes, format).unwrap();
            assert_eq!(g2, g);
            assert_eq!(attrs2, attrs);
        }
    }
}

fn read_outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn ac9_scale_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_synthetic_dataset(dir.path(), 1000, 10, 9);
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out_dir = dir.path().join(format!("run{run}"));
        let cfg = ConfigFile {
            output_dir: Some(out_dir.clone()),
            ..Default::default()
        }
        .over(ConfigFile::load(&config_path).unwrap())
        .resolve()
        .unwrap();
        let start = Instant::now();
        let result = run_pipeline(&cfg).unwrap();
        let elapsed = start.elapsed();
        println!("      run {run}: {elapsed:?}");
        assert!(
            elapsed < Duration::from_secs(1),
            "run {run} took {elapsed:?}"
        );
        assert_eq!(result.report.node_count, 1000);
        assert_eq!(result.report.edge_count, 10_000);
        assert_eq!(result.report.generated_with.platforms.len(), 3);
        outputs.push(read_outputs(&out_dir));
    }
    assert_eq!(outputs[0].len(), 6);
    assert_eq!(outputs[0], outputs[1]);
}

fn ac10_disclosure() {
    // The published centrality peak exceeds anything a 48-person,
    // 10-vote survey can produce: 47 inbound voters + 10 outbound votes,
    // and at most 47 * 10 inbound weight plus 55 outbound under 10..1.
    let n = 48u32;
    let roster = Roster::numbered(n).unwrap();
    // everyone puts node 1 first: the largest inbound load node 1 can get
    let ballots: Vec<Ballot> = (1..=n)
        .map(|r| {
            let ranking: Vec<_> = std::iter::once(1)
                .chain(2..=n)
                .filter(|&t| t != r)
                .take(10)
                .map(id)
                .collect();
            Ballot::new(id(r), ranking)
        })
        .collect();
    let g = build_knowledge_graph(&ballots, &roster, &default_scheme()).unwrap();
    let d = g.degree(id(1)).unwrap();
    let wd = g.weighted_degree(id(1)).unwrap();
    assert_eq!(d.total, 57);
    assert_eq!(wd.in_weight, 470.0);
    assert!(d.total < 82 && wd.total < 1828.0);
    // the complete-ballot network density is fixed at 480 / 2256
    assert!((g.density().unwrap() - 480.0 / 2256.0).abs() < 1e-15);
    assert!((g.density().unwrap() - 0.658).abs() > 0.4);

    let readme = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    let text = fs::read_to_string(readme).expect("README.md at the workspace root");
    assert!(
        text.contains("## Reproducibility"),
        "README lacks the reproducibility section"
    );
    for needle in ["82", "1828", "0.658"] {
        assert!(text.contains(needle), "README does not mention {needle}");
    }
}

fn main() -> ExitCode {
    // budgets: "instant" criteria get 1 s; AC9 times each run itself
    let criteria: [(&str, fn(), u64); 10] = [
        ("AC1 formula exactness (1e-12)", ac1_formula_exactness, 1),
        (
            "AC2 homogeneity, 1000 triples x c in {2,3,10} (1e-9)",
            ac2_homogeneity,
            1,
        ),
        (
            "AC3 normalization contract, 500 vectors",
            ac3_normalization,
            1,
        ),
        (
            "AC4 reported-table consistency (1e-3)",
            ac4_reported_tables,
            1,
        ),
        (
            "AC5 graph metrics vs adjacency-matrix oracle, 100 graphs",
            ac5_graph_oracle,
            2,
        ),
        (
            "AC6 complete-ballot invariants, n in {3,10,48}",
            ac6_ballot_invariants,
            1,
        ),
        (
            "AC7 density of complete and empty graphs",
            ac7_density_edges,
            1,
        ),
        ("AC8 graphml/json round trip, 50 graphs", ac8_round_trip, 2),
        (
            "AC9 1000-node pipeline twice: identical, < 1 s each",
            ac9_scale_and_determinism,
            3,
        ),
        (
            "AC10 non-reproducible published values disclosed",
            ac10_disclosure,
            1,
        ),
    ];
    panic::set_hook(Box::new(|info| eprintln!("      {info}")));
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let ok = panic::catch_unwind(check).is_ok();
        let elapsed = start.elapsed();
        let in_budget = elapsed < Duration::from_secs(budget);
        let status = if ok && in_budget { "PASS" } else { "FAIL" };
        println!("[{status}] {name} ({elapsed:.0?}, budget {budget} s)");
        if status == "FAIL" {
            failed += 1;
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
