#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use orgknow::io::{AttrValue, NodeAttributes};
use orgknow::{DirectedWeightedGraph, NodeId, WeightedEdge};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn id(n: u32) -> NodeId {
    NodeId::new(n).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense weighted adjacency matrix: `w[i][j]` is the arc weight `i -> j`,
/// 0 meaning no arc. Independent of the graph type it is checked against.
#[derive(Debug, Clone)]
pub struct Matrix {
    pub ids: Vec<u32>,
    pub w: Vec<Vec<f64>>,
}

impl Matrix {
    pub fn random(rng: &mut impl Rng, max_n: usize) -> Matrix {
        let n = rng.gen_range(1..=max_n);
        // sparse id space with gaps, like a real roster
        let mut ids: Vec<u32> = (1..=(3 * n as u32)).collect();
        ids.shuffle(rng);
        ids.truncate(n);
        ids.sort_unstable();
        let p: f64 = rng.gen_range(0.0..=1.0);
        let mut w = vec![vec![0.0; n]; n];
        for (i, row) in w.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                if i != j && rng.gen_bool(p) {
                    // quarter-integers keep sums exact in f64
                    *cell = rng.gen_range(1..=40) as f64 / 4.0;
                }
            }
        }
        Matrix { ids, w }
    }

    pub fn to_graph(&self) -> DirectedWeightedGraph {
        let mut g = DirectedWeightedGraph::new();
        for &n in &self.ids {
            g.add_node(id(n));
        }
        for (i, row) in self.w.iter().enumerate() {
            for (j, &weight) in row.iter().enumerate() {
                if weight > 0.0 {
                    g.add_edge(WeightedEdge::new(id(self.ids[i]), id(self.ids[j]), weight))
                        .unwrap();
                }
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// (in, out) arc counts of row/column `k`.
    pub fn degree(&self, k: usize) -> (usize, usize) {
        let out = self.w[k].iter().filter(|&&x| x > 0.0).count();
        let inn = (0..self.n()).filter(|&i| self.w[i][k] > 0.0).count();
        (inn, out)
    }

    pub fn weighted_degree(&self, k: usize) -> (f64, f64) {
        let out = self.w[k].iter().sum();
        let inn = (0..self.n()).map(|i| self.w[i][k]).sum();
        (inn, out)
    }

    /// Density by counting every ordered pair.
    pub fn density(&self) -> Option<f64> {
        let n = self.n();
        if n < 2 {
            return None;
        }
        let mut present = 0usize;
        let mut possible = 0usize;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    possible += 1;
                    if self.w[i][j] > 0.0 {
                        present += 1;
                    }
                }
            }
        }
        Some(present as f64 / possible as f64)
    }
}

pub fn random_attributes(rng: &mut impl Rng, graph: &DirectedWeightedGraph) -> NodeAttributes {
    let mut attrs = NodeAttributes::new();
    for node in graph.nodes() {
        if rng.gen_bool(0.2) {
            continue;
        }
        let mut map = std::collections::BTreeMap::new();
        map.insert(
            "total_reputation".to_string(),
            AttrValue::Number(rng.gen::<f64>() * 3.0),
        );
        map.insert(
            "weighted_degree".to_string(),
            AttrValue::Number(rng.gen_range(0.0..500.0)),
        );
        if rng.gen_bool(0.5) {
            let name: String = (0..rng.gen_range(0..12))
                .map(|_| *b"aZ &<\"',9".choose(rng).unwrap() as char)
                .collect();
            map.insert("name".to_string(), AttrValue::Text(name));
        }
        attrs.insert(node, map);
    }
    attrs
}

/// Writes a synthetic dataset: `n` employees, each voting a complete
/// ballot of `k` colleagues, plus two follower platforms and one
/// endorsement platform. Returns the config path.
pub fn write_synthetic_dataset(dir: &Path, n: u32, k: u32, seed: u64) -> PathBuf {
    let mut rng = rng(seed);
    let mut roster = String::from("id,name\n");
    for i in 1..=n {
        let _ = writeln!(roster, "{i},EMPLOYEE {i}");
    }
    let mut ballots = String::from("respondent_id,rank,target_id\n");
    let all: Vec<u32> = (1..=n).collect();
    for r in 1..=n {
        let picks: Vec<u32> = all
            .choose_multiple(&mut rng, k as usize + 1)
            .copied()
            .filter(|&t| t != r)
            .take(k as usize)
            .collect();
        for (rank, t) in picks.iter().enumerate() {
            let _ = writeln!(ballots, "{r},{},{t}", rank + 1);
        }
    }
    let mut follower = |name: &str| {
        let mut s = String::from("node_id,followers,posts,following\n");
        for i in 1..=n {
            if rng.gen_bool(0.8) {
                let _ = writeln!(
                    s,
                    "{i},{},{},{}",
                    rng.gen_range(0..5000),
                    rng.gen_range(0..800),
                    rng.gen_range(0..1500)
                );
            }
        }
        fs::write(dir.join(name), s).unwrap();
    };
    follower("twitter.csv");
    follower("instagram.csv");
    let mut linkedin = String::from("node_id,endorsements,connections,skills\n");
    for i in 1..=n {
        if rng.gen_bool(0.7) {
            let _ = writeln!(
                linkedin,
                "{i},{},{},{}",
                rng.gen_range(0..300),
                rng.gen_range(0..900),
                rng.gen_range(0..40)
            );
        }
    }
    fs::write(dir.join("roster.csv"), roster).unwrap();
    fs::write(dir.join("ballots.csv"), ballots).unwrap();
    fs::write(dir.join("linkedin.csv"), linkedin).unwrap();
    let config = dir.join("config.json");
    fs::write(
        &config,
        r#"{
  "roster_path": "roster.csv",
  "ballots_path": "ballots.csv",
  "follower_metrics_paths": {"twitter": "twitter.csv", "instagram": "instagram.csv"},
  "endorsement_metrics_paths": {"linkedin": "linkedin.csv"},
  "output_dir": "out"
}
"#,
    )
    .unwrap();
    config
}

/// Path of the bundled six-employee demo dataset.
pub fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo")
}
