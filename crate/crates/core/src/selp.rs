//! Semi-supervised evidential label propagation.
//!
//! Seed nodes carry categorical masses. Every labeled neighbor of an
//! unlabeled node is a source whose categorical mass is discounted by a
//! reliability that decays with the pair's dissimilarity; the sources are
//! fused with Dempster's rule. Sweeps admit nodes whose strongest singleton
//! mass clears `eta`; a closing phase then labels what is left, and nodes
//! that end up with no singleton support are reported as outliers.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::belief::{LabelFrame, SimpleMass};
use crate::error::{Error, Result};
use crate::graph::{Dissimilarity, Graph};
use crate::partition::{Assignment, Labeling, OUTLIER_LABEL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// Reciprocal median of `d^beta` over adjacent pairs with finite `d`.
    Auto,
    Fixed(f64),
}

/// How equal best singleton masses are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Lowest frame index wins.
    LowestLabel,
    /// Uniform choice from a stream seeded by `SelpConfig::rng_seed`,
    /// consumed in node-index order.
    SeededRandom,
}

/// What happens to nodes still unlabeled once the `eta`-gated sweeps stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosingPass {
    /// Repeat batch rounds against the growing labeled set, labeling every
    /// node with any singleton support by its best singleton, until a round
    /// labels nothing. Nodes left with a vacuous mass are outliers.
    UntilStable,
    /// One round against the final labeled set; a node whose mass peaks on
    /// Ω is an outlier, otherwise it takes its best singleton (a tie
    /// between the best singleton and Ω goes to the singleton).
    SingleDecision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelpConfig {
    pub alpha0: f64,
    pub beta: f64,
    pub gamma: Gamma,
    pub eta: f64,
    pub max_iterations: usize,
    pub tie_break: TieBreak,
    pub closing: ClosingPass,
    pub rng_seed: u64,
}

impl Default for SelpConfig {
    fn default() -> Self {
        SelpConfig {
            alpha0: 1.0,
            beta: 2.0,
            gamma: Gamma::Auto,
            eta: 0.7,
            max_iterations: 100,
            tie_break: TieBreak::LowestLabel,
            closing: ClosingPass::UntilStable,
            rng_seed: 0,
        }
    }
}

impl SelpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.alpha0 <= 1.0) {
            return Err(Error::param("alpha0", format!("{} is outside (0, 1]", self.alpha0)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param("beta", format!("{} must be positive", self.beta)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::param("eta", format!("{} is outside (0, 1]", self.eta)));
        }
        if let Gamma::Fixed(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::param("gamma", format!("{g} must be positive")));
            }
        }
        Ok(())
    }

    /// Resolves `gamma` against `g` and returns the per-source reliability.
    pub fn reliability(&self, g: &Graph) -> Result<SourceReliability> {
        self.validate()?;
        let gamma = match self.gamma {
            Gamma::Fixed(v) => v,
            Gamma::Auto => auto_gamma(g, self.beta)?,
        };
        Ok(SourceReliability {
            alpha0: self.alpha0,
            beta: self.beta,
            gamma,
        })
    }
}

/// Discount factor `alpha0 * exp(-gamma * d^beta)` with resolved parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceReliability {
    pub alpha0: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SourceReliability {
    pub fn alpha(&self, d: Dissimilarity) -> f64 {
        source_alpha(d, self.alpha0, self.gamma, self.beta)
    }
}

/// Reliability of a neighbor at dissimilarity `d`; an infinite
/// dissimilarity yields exactly zero.
pub fn source_alpha(d: Dissimilarity, alpha0: f64, gamma: f64, beta: f64) -> f64 {
    match d {
        Dissimilarity::Infinite => 0.0,
        Dissimilarity::Finite(d) => alpha0 * (-gamma * d.powf(beta)).exp(),
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// `1 / median(d^beta)` over unordered adjacent pairs with finite
/// dissimilarity.
pub fn auto_gamma(g: &Graph, beta: f64) -> Result<f64> {
    let mut values: Vec<f64> = g
        .edges()
        .iter()
        .filter_map(|&(i, j)| {
            Dissimilarity::from_similarity(g.similarity_unchecked(i, j))
                .finite()
                .map(|d| d.powf(beta))
        })
        .collect();
    if values.is_empty() {
        return Err(Error::DegenerateGraph);
    }
    let m = median(&mut values);
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::DegenerateGraph);
    }
    Ok(1.0 / m)
}

/// The labeled node set with its community labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSet {
    frame: LabelFrame,
    /// (node, label) sorted by node.
    assignments: Vec<(usize, usize)>,
}

impl SeedSet {
    /// Every label of `frame` must have at least one seed, every node must
    /// exist in a graph of `node_count` nodes, and no node may be seeded
    /// twice with different labels.
    pub fn new(frame: LabelFrame, assignments: Vec<(usize, usize)>, node_count: usize) -> Result<Self> {
        let mut assignments = assignments;
        assignments.sort_unstable();
        assignments.dedup();
        let mut covered = vec![false; frame.len()];
        for (pos, &(node, label)) in assignments.iter().enumerate() {
            if node >= node_count {
                return Err(Error::NodeIndex {
                    index: node,
                    len: node_count,
                });
            }
            if label >= frame.len() {
                return Err(Error::FrameMismatch(format!("seed label index {label} outside frame")));
            }
            if pos > 0 && assignments[pos - 1].0 == node {
                return Err(Error::Config(format!("node index {node} is seeded with two labels")));
            }
            covered[label] = true;
        }
        if let Some(k) = covered.iter().position(|&c| !c) {
            return Err(Error::Config(format!(
                "community `{}` has no labeled node",
                frame.label(k)
            )));
        }
        Ok(SeedSet { frame, assignments })
    }

    /// Seeds from `(node_id, label)` pairs; the frame lists labels in order
    /// of first appearance.
    pub fn from_pairs<S: AsRef<str>>(g: &Graph, pairs: &[(S, S)]) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        for (_, l) in pairs {
            if !labels.iter().any(|x| x == l.as_ref()) {
                labels.push(l.as_ref().to_string());
            }
        }
        if labels.is_empty() {
            return Err(Error::Config("no seeds given".into()));
        }
        Self::with_frame(g, LabelFrame::new(labels)?, pairs)
    }

    /// Seeds against a given frame, which every label must belong to.
    pub fn with_frame<S: AsRef<str>>(g: &Graph, frame: LabelFrame, pairs: &[(S, S)]) -> Result<Self> {
        let mut assignments: Vec<(usize, usize)> = Vec::with_capacity(pairs.len());
        for (node, label) in pairs {
            let i = g.require_index(node.as_ref())?;
            let k = frame.require(label.as_ref())?;
            if assignments.iter().any(|&(j, l)| j == i && l != k) {
                return Err(Error::Config(format!("node {} is seeded with two labels", node.as_ref())));
            }
            assignments.push((i, k));
        }
        Self::new(frame, assignments, g.node_count())
    }

    pub fn frame(&self) -> &LabelFrame {
        &self.frame
    }

    pub fn assignments(&self) -> &[(usize, usize)] {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn label_of(&self, node: usize) -> Option<usize> {
        self.assignments
            .binary_search_by_key(&node, |&(n, _)| n)
            .ok()
            .map(|pos| self.assignments[pos].1)
    }

    pub fn contains(&self, node: usize) -> bool {
        self.label_of(node).is_some()
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignments.iter().map(|&(n, _)| n)
    }
}

/// Parses inline seeds `id:label,id:label`.
pub fn parse_inline_seeds(text: &str) -> Result<Vec<(String, String)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            item.rsplit_once(':')
                .filter(|(n, l)| !n.is_empty() && !l.is_empty())
                .map(|(n, l)| (n.to_string(), l.to_string()))
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    message: format!("seed `{item}` is not of the form id:label"),
                })
        })
        .collect()
}

/// Parses a seeds file: one `node_id label` per line, `#` comments allowed.
pub fn parse_seed_file<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = t.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("expected `node_id label`, found {} tokens", tokens.len()),
            });
        }
        pairs.push((tokens[0].to_string(), tokens[1].to_string()));
    }
    Ok(pairs)
}

/// Fused evidence about `x` from its labeled neighbors.
///
/// `labels[t]` is the current label of node `t`, `None` for unlabeled
/// nodes, which contribute nothing.
pub fn node_evidence(
    g: &Graph,
    x: usize,
    labels: &[Option<usize>],
    frame: &LabelFrame,
    reliability: &SourceReliability,
) -> Result<SimpleMass> {
    if x >= g.node_count() {
        return Err(Error::NodeIndex {
            index: x,
            len: g.node_count(),
        });
    }
    if labels.len() != g.node_count() {
        return Err(Error::InputMismatch(format!(
            "{} labels for {} nodes",
            labels.len(),
            g.node_count()
        )));
    }
    let sources = g.neighbors(x).iter().filter_map(|&t| {
        labels[t].map(|k| {
            let d = Dissimilarity::from_similarity(g.similarity_unchecked(x, t));
            (k, reliability.alpha(d))
        })
    });
    fuse_sources(g, x, frame, sources)
}

fn fuse_sources(
    g: &Graph,
    x: usize,
    frame: &LabelFrame,
    sources: impl Iterator<Item = (usize, f64)>,
) -> Result<SimpleMass> {
    let mut mass = SimpleMass::vacuous(frame);
    let mut seen: Vec<usize> = Vec::new();
    for (k, alpha) in sources {
        if k >= frame.len() {
            return Err(Error::FrameMismatch(format!("label index {k} outside frame")));
        }
        if !seen.contains(&k) {
            seen.push(k);
        }
        if !mass.absorb_discounted_categorical(k, alpha) {
            seen.sort_unstable();
            return Err(Error::TotalConflict {
                labels: seen.iter().map(|&k| frame.label(k).to_string()).collect(),
                node: Some(g.id(x).to_string()),
            });
        }
    }
    Ok(mass)
}

/// How a node received its final label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Seed,
    /// Admitted by the `eta` gate in the given 1-based sweep.
    Sweep(usize),
    Final,
    Outlier,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Seed => f.write_str("seed"),
            Phase::Sweep(k) => write!(f, "sweep-{k}"),
            Phase::Final => f.write_str("final"),
            Phase::Outlier => f.write_str("outlier"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub frame: LabelFrame,
    pub assignments: Vec<Assignment>,
    /// Seeds keep their categorical mass; other nodes keep the fused mass
    /// they were decided on.
    pub masses: Vec<SimpleMass>,
    pub phases: Vec<Phase>,
    /// Number of sweeps that admitted at least one node.
    pub iterations: usize,
    pub admitted_per_iteration: Vec<Vec<usize>>,
    /// Nodes labeled by the closing phase, outliers excluded.
    pub residual_nodes: Vec<usize>,
    pub closing_rounds: usize,
    /// The sweep loop stopped at `max_iterations` rather than on its own.
    pub hit_iteration_cap: bool,
    pub gamma: f64,
}

#[derive(Debug, Serialize)]
struct ResultRecord<'a> {
    node_id: &'a str,
    label: &'a str,
    m_best: f64,
    m_omega: f64,
    phase: String,
}

impl DetectionResult {
    pub fn labeling(&self) -> Labeling {
        Labeling {
            frame: self.frame.clone(),
            assignments: self.assignments.clone(),
        }
    }

    pub fn outliers(&self) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_outlier())
            .map(|(i, _)| i)
            .collect()
    }

    fn label_name(&self, i: usize) -> &str {
        match self.assignments[i] {
            Assignment::Community(k) => self.frame.label(k),
            Assignment::Outlier => OUTLIER_LABEL,
        }
    }

    fn records<'a>(&'a self, g: &'a Graph) -> impl Iterator<Item = ResultRecord<'a>> + 'a {
        (0..self.assignments.len()).map(move |i| ResultRecord {
            node_id: g.id(i),
            label: self.label_name(i),
            m_best: self.masses[i].best_singletons().0,
            m_omega: self.masses[i].omega(),
            phase: self.phases[i].to_string(),
        })
    }

    /// `node_id,label,m_best,m_omega,phase` rows in graph order.
    pub fn write_csv<W: Write>(&self, g: &Graph, mut out: W) -> Result<()> {
        writeln!(out, "node_id,label,m_best,m_omega,phase")?;
        for r in self.records(g) {
            writeln!(out, "{},{},{},{},{}", r.node_id, r.label, r.m_best, r.m_omega, r.phase)?;
        }
        Ok(())
    }

    pub fn to_json(&self, g: &Graph) -> serde_json::Value {
        let records: Vec<ResultRecord> = self.records(g).collect();
        serde_json::to_value(records).expect("result records serialize")
    }
}

struct TiePicker {
    policy: TieBreak,
    rng: ChaCha8Rng,
}

impl TiePicker {
    fn pick(&mut self, tied: &[usize]) -> usize {
        match self.policy {
            _ if tied.len() == 1 => tied[0],
            TieBreak::LowestLabel => tied[0],
            TieBreak::SeededRandom => *tied.choose(&mut self.rng).expect("non-empty tie set"),
        }
    }
}

/// Precomputed discount factor per adjacency entry.
struct EdgeReliability {
    alphas: Vec<Vec<f64>>,
}

impl EdgeReliability {
    fn new(g: &Graph, reliability: &SourceReliability) -> Self {
        let alphas = g
            .neighbor_dissimilarities()
            .into_iter()
            .map(|row| row.into_iter().map(|d| reliability.alpha(d)).collect())
            .collect();
        EdgeReliability { alphas }
    }

    fn evidence(&self, g: &Graph, x: usize, labels: &[Option<usize>], frame: &LabelFrame) -> Result<SimpleMass> {
        let sources = g
            .neighbors(x)
            .iter()
            .zip(&self.alphas[x])
            .filter_map(|(&t, &alpha)| labels[t].map(|k| (k, alpha)));
        fuse_sources(g, x, frame, sources)
    }

    /// Evidence for every unlabeled node, in node order.
    fn evidence_for_unlabeled(
        &self,
        g: &Graph,
        labels: &[Option<usize>],
        frame: &LabelFrame,
    ) -> Result<Vec<(usize, SimpleMass)>> {
        let pending: Vec<usize> = (0..g.node_count()).filter(|&x| labels[x].is_none()).collect();
        pending
            .into_par_iter()
            .map(|x| self.evidence(g, x, labels, frame).map(|m| (x, m)))
            .collect()
    }
}

/// Runs detection from `seeds` on `g`.
pub fn propagate(g: &Graph, seeds: &SeedSet, cfg: &SelpConfig) -> Result<DetectionResult> {
    let reliability = cfg.reliability(g)?;
    let n = g.node_count();
    if let Some(bad) = seeds.nodes().find(|&x| x >= n) {
        return Err(Error::NodeIndex { index: bad, len: n });
    }
    let frame = seeds.frame().clone();
    let edges = EdgeReliability::new(g, &reliability);
    let mut ties = TiePicker {
        policy: cfg.tie_break,
        rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
    };

    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut masses: Vec<Option<SimpleMass>> = vec![None; n];
    let mut phases: Vec<Option<Phase>> = vec![None; n];
    for &(x, k) in seeds.assignments() {
        labels[x] = Some(k);
        masses[x] = Some(SimpleMass::categorical(&frame, k)?);
        phases[x] = Some(Phase::Seed);
    }

    let mut admitted_per_iteration: Vec<Vec<usize>> = Vec::new();
    let mut hit_iteration_cap = false;
    loop {
        if admitted_per_iteration.len() >= cfg.max_iterations {
            hit_iteration_cap = true;
            break;
        }
        let sweep = admitted_per_iteration.len() + 1;
        let mut admitted = Vec::new();
        for (x, mass) in edges.evidence_for_unlabeled(g, &labels, &frame)? {
            let (best, tied) = mass.best_singletons();
            if best > cfg.eta {
                admitted.push((x, ties.pick(&tied), mass));
            }
        }
        if admitted.is_empty() {
            break;
        }
        let mut nodes = Vec::with_capacity(admitted.len());
        for (x, k, mass) in admitted {
            labels[x] = Some(k);
            masses[x] = Some(mass);
            phases[x] = Some(Phase::Sweep(sweep));
            nodes.push(x);
        }
        admitted_per_iteration.push(nodes);
    }

    let mut residual_nodes = Vec::new();
    let mut closing_rounds = 0;
    let mut outliers: Vec<(usize, SimpleMass)> = Vec::new();
    match cfg.closing {
        ClosingPass::UntilStable => loop {
            let pending = edges.evidence_for_unlabeled(g, &labels, &frame)?;
            if pending.is_empty() {
                break;
            }
            closing_rounds += 1;
            let mut decided = Vec::new();
            let mut stuck = Vec::new();
            for (x, mass) in pending {
                let (best, tied) = mass.best_singletons();
                if best > 0.0 {
                    decided.push((x, ties.pick(&tied), mass));
                } else {
                    stuck.push((x, mass));
                }
            }
            if decided.is_empty() {
                outliers = stuck;
                break;
            }
            for (x, k, mass) in decided {
                labels[x] = Some(k);
                masses[x] = Some(mass);
                phases[x] = Some(Phase::Final);
                residual_nodes.push(x);
            }
        },
        ClosingPass::SingleDecision => {
            let pending = edges.evidence_for_unlabeled(g, &labels, &frame)?;
            if !pending.is_empty() {
                closing_rounds = 1;
            }
            let mut decided = Vec::new();
            for (x, mass) in pending {
                let (best, tied) = mass.best_singletons();
                if mass.omega() > best {
                    outliers.push((x, mass));
                } else {
                    decided.push((x, ties.pick(&tied), mass));
                }
            }
            for (x, k, mass) in decided {
                labels[x] = Some(k);
                masses[x] = Some(mass);
                phases[x] = Some(Phase::Final);
                residual_nodes.push(x);
            }
        }
    }
    residual_nodes.sort_unstable();

    let outlier_set: HashSet<usize> = outliers.iter().map(|(x, _)| *x).collect();
    for (x, mass) in outliers {
        masses[x] = Some(mass);
        phases[x] = Some(Phase::Outlier);
    }
    let assignments = (0..n)
        .map(|x| match labels[x] {
            Some(k) if !outlier_set.contains(&x) => Assignment::Community(k),
            _ => Assignment::Outlier,
        })
        .collect();

    Ok(DetectionResult {
        frame,
        assignments,
        masses: masses
            .into_iter()
            .map(|m| m.expect("every node receives a mass"))
            .collect(),
        phases: phases
            .into_iter()
            .map(|p| p.expect("every node receives a phase"))
            .collect(),
        iterations: admitted_per_iteration.len(),
        admitted_per_iteration,
        residual_nodes,
        closing_rounds,
        hit_iteration_cap,
        gamma: reliability.gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::karate_graph;
    use crate::graph::parse_edge_list;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn alpha_values() {
        assert_eq!(source_alpha(Dissimilarity::Finite(0.0), 1.0, 0.5, 2.0), 1.0);
        assert_eq!(source_alpha(Dissimilarity::Infinite, 1.0, 0.5, 2.0), 0.0);
        let a = source_alpha(Dissimilarity::Finite(1.0), 1.0, 0.5, 2.0);
        assert!(close(a, (-0.5f64).exp(), 1e-15));
        assert!(close(a, 0.6065, 1e-4));
    }

    #[test]
    fn gamma_constant_dissimilarity() {
        // K4: every edge has 2 shared neighbors, s = 2/6, d = 2.
        let g = parse_edge_list("1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n").unwrap();
        assert!(close(auto_gamma(&g, 2.0).unwrap(), 0.25, 1e-12));
        // triangle: s = 1/4, d = 3
        let t = parse_edge_list("1 2\n2 3\n1 3\n").unwrap();
        assert!(close(auto_gamma(&t, 2.0).unwrap(), 1.0 / 9.0, 1e-12));
    }

    #[test]
    fn gamma_even_median() {
        let mut v = vec![3.0, 1.0];
        assert_eq!(median(&mut v), 2.0);
        let mut v = vec![5.0, 1.0, 3.0];
        assert_eq!(median(&mut v), 3.0);
    }

    #[test]
    fn gamma_degenerate_graph() {
        let path = parse_edge_list("1 2\n2 3\n3 4\n").unwrap();
        assert!(matches!(auto_gamma(&path, 2.0), Err(Error::DegenerateGraph)));
    }

    #[test]
    fn karate_gamma_skips_infinite_pairs() {
        let g = karate_graph();
        let gamma = auto_gamma(&g, 2.0).unwrap();
        assert!(gamma.is_finite() && gamma > 0.0);
        // median dissimilarity on karate is 8
        assert!(close(gamma, 1.0 / 64.0, 1e-12));
    }

    #[test]
    fn evidence_without_labeled_neighbors_is_vacuous() {
        let g = parse_edge_list("1 2\n2 3\n1 3\n").unwrap();
        let frame = LabelFrame::new(["a"]).unwrap();
        let rel = SourceReliability {
            alpha0: 1.0,
            beta: 2.0,
            gamma: 0.5,
        };
        let m = node_evidence(&g, 0, &[None, None, None], &frame, &rel).unwrap();
        assert!(m.is_vacuous());
    }

    #[test]
    fn evidence_single_source() {
        // triangle: d = 3; choose gamma so that alpha = 0.6
        let g = parse_edge_list("1 2\n2 3\n1 3\n").unwrap();
        let frame = LabelFrame::new(["a", "b"]).unwrap();
        let rel = SourceReliability {
            alpha0: 1.0,
            beta: 2.0,
            gamma: -(0.6f64.ln()) / 9.0,
        };
        let m = node_evidence(&g, 0, &[None, Some(0), None], &frame, &rel).unwrap();
        assert!(close(m.singleton(0), 0.6, 1e-12));
        assert!(close(m.omega(), 0.4, 1e-12));
    }

    #[test]
    fn conflicting_fully_reliable_sources() {
        // alpha0 = 1 and gamma huge is not enough for alpha = 1; use d = 0
        // via a direct fuse with alpha 1.
        let g = parse_edge_list("x y\ny z\n").unwrap();
        let frame = LabelFrame::new(["a", "b"]).unwrap();
        let err = fuse_sources(&g, 1, &frame, [(0, 1.0), (1, 1.0)].into_iter()).unwrap_err();
        match err {
            Error::TotalConflict { labels, node } => {
                assert_eq!(labels, vec!["a", "b"]);
                assert_eq!(node.as_deref(), Some("y"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn seed_set_validation() {
        let g = karate_graph();
        assert!(SeedSet::from_pairs(&g, &[("1", "a"), ("34", "b")]).is_ok());
        assert!(matches!(
            SeedSet::from_pairs(&g, &[("1", "a"), ("99", "b")]),
            Err(Error::UnknownNode(_))
        ));
        let frame = LabelFrame::new(["a", "b"]).unwrap();
        assert!(matches!(
            SeedSet::with_frame(&g, frame, &[("1", "a")]),
            Err(Error::Config(_))
        ));
        assert!(SeedSet::from_pairs(&g, &[("1", "a"), ("1", "b")]).is_err());
    }

    #[test]
    fn inline_and_file_seeds() {
        assert_eq!(
            parse_inline_seeds("1:w1, 34:w2").unwrap(),
            vec![("1".to_string(), "w1".to_string()), ("34".to_string(), "w2".to_string())]
        );
        assert!(parse_inline_seeds("1w1").is_err());
        let file = "# seeds\n1 w1\n\n34 w2\n";
        assert_eq!(parse_seed_file(file.as_bytes()).unwrap().len(), 2);
        assert!(matches!(
            parse_seed_file("1 w1 extra\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn config_validation() {
        let bad = [
            SelpConfig { alpha0: 0.0, ..Default::default() },
            SelpConfig { alpha0: 1.2, ..Default::default() },
            SelpConfig { beta: 0.0, ..Default::default() },
            SelpConfig { eta: 0.0, ..Default::default() },
            SelpConfig { eta: 1.1, ..Default::default() },
            SelpConfig { gamma: Gamma::Fixed(-1.0), ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(SelpConfig::default().validate().is_ok());
    }

    #[test]
    fn phase_strings() {
        assert_eq!(Phase::Sweep(3).to_string(), "sweep-3");
        assert_eq!(Phase::Outlier.to_string(), "outlier");
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let g = karate_graph();
        let seeds = SeedSet::from_pairs(&g, &[("5", "w1"), ("24", "w2")]).unwrap();
        let cfg = SelpConfig {
            max_iterations: 2,
            ..Default::default()
        };
        let r = propagate(&g, &seeds, &cfg).unwrap();
        assert_eq!(r.iterations, 2);
        assert!(r.hit_iteration_cap);
        let r = propagate(&g, &seeds, &SelpConfig::default()).unwrap();
        assert!(!r.hit_iteration_cap);
    }

    #[test]
    fn csv_export_header_and_phases() {
        let g = karate_graph();
        let seeds = SeedSet::from_pairs(&g, &[("1", "w1"), ("34", "w2")]).unwrap();
        let r = propagate(&g, &seeds, &SelpConfig::default()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("node_id,label,m_best,m_omega,phase"));
        assert!(text.contains("\n1,w1,1,0,seed\n"));
        assert!(text.contains("\n12,OUTLIER,0,1,outlier\n"));
        assert_eq!(text.lines().count(), 35);
    }
}
