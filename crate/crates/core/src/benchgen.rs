//! Planted-partition benchmark graphs parameterized by the mixing
//! fraction `mu`, and a loader for externally generated labeled benchmarks
//! (e.g. LFR `network.dat` / `community.dat`).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::GroundTruth;
use crate::graph::{parse_edge_pairs, write_edge_list, Graph};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub n: usize,
    /// Expected degree of every node.
    pub avg_degree: f64,
    /// Expected fraction of a node's edges leaving its community.
    pub mu: f64,
    pub cmin: usize,
    pub cmax: usize,
    pub rng_seed: u64,
}

impl PlantedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.cmin == 0 || self.cmin > self.cmax || self.cmax > self.n {
            return Err(Error::Config(format!(
                "community bounds need 1 <= cmin <= cmax <= n, got cmin={} cmax={} n={}",
                self.cmin, self.cmax, self.n
            )));
        }
        if !(self.avg_degree >= 0.0 && self.avg_degree < self.n as f64) {
            return Err(Error::Config(format!(
                "average degree {} must lie in [0, n)",
                self.avg_degree
            )));
        }
        if !(0.0..1.0).contains(&self.mu) {
            return Err(Error::Config(format!("mu {} must lie in [0, 1)", self.mu)));
        }
        Ok(())
    }

    /// File stem naming every parameter.
    pub fn fingerprint(&self) -> String {
        format!(
            "planted_n{}_k{}_mu{}_cmin{}_cmax{}_seed{}",
            self.n, self.avg_degree, self.mu, self.cmin, self.cmax, self.rng_seed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedBenchmark {
    pub graph: Graph,
    pub truth: GroundTruth,
    pub community_sizes: Vec<usize>,
    /// Connectivity is not enforced; this reports what was realized.
    pub component_count: usize,
}

/// Community sizes uniform in `[cmin, cmax]` summing to `n`.
///
/// A remainder below `cmin` is spread one node at a time over the earlier
/// communities that still have room below `cmax`. Only when none do is it
/// kept as an undersized community.
fn community_sizes(cfg: &PlantedConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut remaining = cfg.n;
    while remaining > 0 {
        if remaining <= cfg.cmax && (remaining >= cfg.cmin || sizes.is_empty()) {
            sizes.push(remaining);
            break;
        }
        if remaining < cfg.cmin {
            let mut slot = 0;
            while remaining > 0 && sizes.iter().any(|&s| s < cfg.cmax) {
                if sizes[slot] < cfg.cmax {
                    sizes[slot] += 1;
                    remaining -= 1;
                }
                slot = (slot + 1) % sizes.len();
            }
            if remaining > 0 {
                sizes.push(remaining);
            }
            break;
        }
        let s = rng.gen_range(cfg.cmin..=cfg.cmax.min(remaining));
        sizes.push(s);
        remaining -= s;
    }
    sizes
}

/// Samples a planted-partition graph.
///
/// Within community `c` of size `s`, each pair is linked with probability
/// `(1 - mu) k / (s - 1)`; across communities with a single probability
/// chosen so the expected number of external edges is `mu k n / 2`.
pub fn generate_planted(cfg: &PlantedConfig) -> Result<PlantedBenchmark> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let sizes = community_sizes(cfg, &mut rng);
    let n = cfg.n;
    let k = cfg.avg_degree;

    let mut p_in = Vec::with_capacity(sizes.len());
    for &s in &sizes {
        let p = if s > 1 { (1.0 - cfg.mu) * k / (s - 1) as f64 } else { 0.0 };
        if p > 1.0 {
            return Err(Error::Config(format!(
                "community of {s} nodes cannot host {:.2} internal links per node (p_in = {p:.3} > 1)",
                (1.0 - cfg.mu) * k
            )));
        }
        p_in.push(p);
    }
    let cross_pairs: f64 = sizes.iter().map(|&s| (s * (n - s)) as f64).sum::<f64>() / 2.0;
    let external_edges = cfg.mu * k * n as f64 / 2.0;
    let p_out = if external_edges == 0.0 {
        0.0
    } else if cross_pairs == 0.0 {
        return Err(Error::Config("mu > 0 needs at least two communities".into()));
    } else {
        external_edges / cross_pairs
    };
    if p_out > 1.0 {
        return Err(Error::Config(format!("inter-community probability {p_out:.3} exceeds 1")));
    }

    let mut membership = Vec::with_capacity(n);
    for (c, &s) in sizes.iter().enumerate() {
        membership.extend(std::iter::repeat_n(c, s));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if membership[i] == membership[j] {
                p_in[membership[i]]
            } else {
                p_out
            };
            if p > 0.0 && rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let ids: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let graph = Graph::from_edges(ids, edges)?;
    let pairs: Vec<(String, String)> = (0..n)
        .map(|i| (graph.id(i).to_string(), format!("c{}", membership[i] + 1)))
        .collect();
    let truth = GroundTruth::from_pairs(&graph, &pairs)?;
    let component_count = graph.connected_components().into_iter().max().map_or(0, |m| m + 1);
    Ok(PlantedBenchmark {
        graph,
        truth,
        community_sizes: sizes,
        component_count,
    })
}

/// Fraction of edges whose endpoints lie in different communities.
pub fn realized_mixing(g: &Graph, truth: &GroundTruth) -> f64 {
    if g.edge_count() == 0 {
        return 0.0;
    }
    let external = g
        .edges()
        .iter()
        .filter(|&&(a, b)| truth.membership()[a] != truth.membership()[b])
        .count();
    external as f64 / g.edge_count() as f64
}

pub fn mean_degree(g: &Graph) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    2.0 * g.edge_count() as f64 / g.node_count() as f64
}

/// Writes `node_id community` lines in graph order.
pub fn write_communities<W: Write>(g: &Graph, truth: &GroundTruth, mut out: W) -> Result<()> {
    for i in 0..g.node_count() {
        writeln!(out, "{} {}", g.id(i), truth.label_of(i))?;
    }
    Ok(())
}

/// Writes `<stem>.edges` and `<stem>.communities` into `dir`, returning
/// both paths.
pub fn save_benchmark(g: &Graph, truth: &GroundTruth, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let edge_path = dir.join(format!("{stem}.edges"));
    let comm_path = dir.join(format!("{stem}.communities"));
    let mut edges = BufWriter::new(File::create(&edge_path)?);
    write_edge_list(g, &mut edges)?;
    edges.flush()?;
    let mut comms = BufWriter::new(File::create(&comm_path)?);
    write_communities(g, truth, &mut comms)?;
    comms.flush()?;
    Ok((edge_path, comm_path))
}

/// Reads an edge list and a `node_id community_id` file.
///
/// Node order follows the community file, so nodes without edges are kept.
/// Edges listed in both directions collapse.
pub fn load_labeled_benchmark<E: BufRead, C: BufRead>(edges: E, communities: C) -> Result<(Graph, GroundTruth)> {
    let mut ids: Vec<String> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (n, line) in communities.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = t.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("expected `node_id community_id`, found {} tokens", tokens.len()),
            });
        }
        if index.insert(tokens[0].to_string(), ids.len()).is_some() {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("node `{}` listed twice", tokens[0]),
            });
        }
        ids.push(tokens[0].to_string());
        labels.push(tokens[1].to_string());
    }

    let pairs = parse_edge_pairs(edges)?;
    let mut missing: Vec<String> = Vec::new();
    let mut edge_idx = Vec::with_capacity(pairs.len());
    for (a, b) in &pairs {
        let (ia, ib) = (index.get(a), index.get(b));
        for (id, found) in [(a, ia), (b, ib)] {
            if found.is_none() && !missing.contains(id) {
                missing.push(id.clone());
            }
        }
        if let (Some(&ia), Some(&ib)) = (ia, ib) {
            edge_idx.push((ia, ib));
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage(missing));
    }
    let graph = Graph::from_edges(ids.clone(), edge_idx)?;
    let truth_pairs: Vec<(String, String)> = ids.into_iter().zip(labels).collect();
    let truth = GroundTruth::from_pairs(&graph, &truth_pairs)?;
    Ok((graph, truth))
}

pub fn load_labeled_benchmark_files(edge_path: &Path, community_path: &Path) -> Result<(Graph, GroundTruth)> {
    let edges = std::io::BufReader::new(File::open(edge_path)?);
    let comms = std::io::BufReader::new(File::open(community_path)?);
    load_labeled_benchmark(edges, comms)
}
