//! Majority-vote label propagation baselines.
//!
//! [`lpa`] is the unsupervised asynchronous algorithm. [`slp`] is a
//! seed-clamped variant: seeds keep their labels, unlabeled nodes adopt the
//! majority among their labeled neighbors. It is a reconstruction of the
//! usual semi-supervised LPA from its one-line description, with hard labels
//! rather than label distributions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::LabelFrame;
use crate::graph::Graph;
use crate::partition::{Assignment, Labeling};
use crate::selp::SeedSet;

/// Default sweep cap for both baselines.
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Per-label vote counter reused across nodes.
struct Votes {
    counts: Vec<usize>,
    touched: Vec<usize>,
}

impl Votes {
    fn new(labels: usize) -> Self {
        Votes {
            counts: vec![0; labels],
            touched: Vec::new(),
        }
    }

    fn tally(&mut self, labels: impl Iterator<Item = usize>) {
        for l in self.touched.drain(..) {
            self.counts[l] = 0;
        }
        for l in labels {
            if self.counts[l] == 0 {
                self.touched.push(l);
            }
            self.counts[l] += 1;
        }
    }

    /// Labels with the highest count, ascending.
    fn maximal(&self) -> Vec<usize> {
        let best = self.touched.iter().map(|&l| self.counts[l]).max().unwrap_or(0);
        let mut out: Vec<usize> = self
            .touched
            .iter()
            .copied()
            .filter(|&l| self.counts[l] == best)
            .collect();
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpaOutcome {
    /// Community per node, named by the node index the label started on.
    pub labels: Vec<usize>,
    pub sweeps: usize,
    pub converged: bool,
}

impl LpaOutcome {
    pub fn community_count(&self) -> usize {
        let mut seen = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Frame of surviving labels (named after their originating node) in
    /// order of first occurrence.
    pub fn labeling(&self, g: &Graph) -> Labeling {
        let mut names: Vec<usize> = Vec::new();
        let mut slot = vec![usize::MAX; self.labels.len()];
        for &l in &self.labels {
            if slot[l] == usize::MAX {
                slot[l] = names.len();
                names.push(l);
            }
        }
        let frame = LabelFrame::new(names.iter().map(|&l| g.id(l).to_string()))
            .unwrap_or_else(|_| LabelFrame::new(["empty"]).expect("single label"));
        Labeling {
            frame,
            assignments: self.labels.iter().map(|&l| Assignment::Community(slot[l])).collect(),
        }
    }
}

/// Asynchronous label propagation from unique initial labels.
///
/// Each sweep visits nodes in a fresh random order; a node takes the label
/// most frequent among its neighbors, ties broken uniformly. Stops once
/// every node holds one of its neighborhood's maximal labels, or after
/// `max_sweeps`.
pub fn lpa(g: &Graph, rng_seed: u64, max_sweeps: usize) -> LpaOutcome {
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut votes = Votes::new(n);
    let mut sweeps = 0;
    let mut converged = is_lpa_stable(g, &labels, &mut votes);
    while !converged && sweeps < max_sweeps {
        sweeps += 1;
        order.shuffle(&mut rng);
        for &v in &order {
            if g.degree(v) == 0 {
                continue;
            }
            votes.tally(g.neighbors(v).iter().map(|&u| labels[u]));
            let best = votes.maximal();
            labels[v] = best[rng.gen_range(0..best.len())];
        }
        converged = is_lpa_stable(g, &labels, &mut votes);
    }
    LpaOutcome {
        labels,
        sweeps,
        converged,
    }
}

fn is_lpa_stable(g: &Graph, labels: &[usize], votes: &mut Votes) -> bool {
    (0..g.node_count()).all(|v| {
        if g.degree(v) == 0 {
            return true;
        }
        votes.tally(g.neighbors(v).iter().map(|&u| labels[u]));
        votes.maximal().contains(&labels[v])
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlpOutcome {
    pub labeling: Labeling,
    pub sweeps: usize,
    pub converged: bool,
}

/// Seed-clamped majority propagation.
///
/// Unlabeled nodes with no labeled neighbor skip their turn. After the
/// sweeps, any node still unlabeled is settled by repeated majority passes
/// over its labeled neighbors; a node that never sees one (a component
/// without seeds) gets a uniformly random label.
pub fn slp(g: &Graph, seeds: &SeedSet, rng_seed: u64, max_sweeps: usize) -> SlpOutcome {
    let n = g.node_count();
    let c = seeds.frame().len();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut clamped = vec![false; n];
    for &(x, k) in seeds.assignments() {
        labels[x] = Some(k);
        clamped[x] = true;
    }
    let mut order: Vec<usize> = (0..n).filter(|&v| !clamped[v]).collect();
    let mut votes = Votes::new(c);
    let mut sweeps = 0;
    let mut converged = is_slp_stable(g, &labels, &clamped, &mut votes);
    while !converged && sweeps < max_sweeps {
        sweeps += 1;
        order.shuffle(&mut rng);
        for &v in &order {
            votes.tally(g.neighbors(v).iter().filter_map(|&u| labels[u]));
            let best = votes.maximal();
            if best.is_empty() {
                continue;
            }
            labels[v] = Some(best[rng.gen_range(0..best.len())]);
        }
        converged = is_slp_stable(g, &labels, &clamped, &mut votes);
    }

    loop {
        let mut progressed = false;
        for v in 0..n {
            if labels[v].is_some() {
                continue;
            }
            votes.tally(g.neighbors(v).iter().filter_map(|&u| labels[u]));
            let best = votes.maximal();
            if !best.is_empty() {
                labels[v] = Some(best[rng.gen_range(0..best.len())]);
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    let assignments = labels
        .into_iter()
        .map(|l| Assignment::Community(l.unwrap_or_else(|| rng.gen_range(0..c))))
        .collect();
    SlpOutcome {
        labeling: Labeling {
            frame: seeds.frame().clone(),
            assignments,
        },
        sweeps,
        converged,
    }
}

fn is_slp_stable(g: &Graph, labels: &[Option<usize>], clamped: &[bool], votes: &mut Votes) -> bool {
    (0..g.node_count()).all(|v| {
        if clamped[v] {
            return true;
        }
        votes.tally(g.neighbors(v).iter().filter_map(|&u| labels[u]));
        let best = votes.maximal();
        match labels[v] {
            None => best.is_empty(),
            Some(l) => best.contains(&l),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;

    fn two_triangles() -> Graph {
        parse_edge_list("a b\nb c\na c\nx y\ny z\nx z\n").unwrap()
    }

    #[test]
    fn lpa_disjoint_triangles() {
        let g = two_triangles();
        for seed in 0..20 {
            let out = lpa(&g, seed, DEFAULT_MAX_SWEEPS);
            assert!(out.converged);
            assert_eq!(out.community_count(), 2);
            assert_eq!(out.labels[0], out.labels[1]);
            assert_eq!(out.labels[1], out.labels[2]);
            assert_eq!(out.labels[3], out.labels[4]);
            assert_eq!(out.labels[4], out.labels[5]);
        }
    }

    #[test]
    fn lpa_isolated_node() {
        let g = Graph::from_edges(vec!["solo".into()], []).unwrap();
        let out = lpa(&g, 1, 10);
        assert_eq!(out.labels, vec![0]);
        assert!(out.converged);
        assert_eq!(out.labeling(&g).frame.labels(), &["solo"]);
    }

    #[test]
    fn lpa_reproducible() {
        let g = crate::datasets::karate_graph();
        assert_eq!(lpa(&g, 7, 100), lpa(&g, 7, 100));
    }

    #[test]
    fn slp_path_tie() {
        let g = parse_edge_list("a b\nb c\n").unwrap();
        let seeds = SeedSet::from_pairs(&g, &[("a", "w1"), ("c", "w2")]).unwrap();
        let mut seen = [false; 2];
        for seed in 0..50 {
            let out = slp(&g, &seeds, seed, 10);
            let k = out.labeling.assignments[1].community().unwrap();
            seen[k] = true;
            assert_eq!(out.labeling.assignments[0], Assignment::Community(0));
            assert_eq!(out.labeling.assignments[2], Assignment::Community(1));
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn slp_triangles_recovered() {
        let g = two_triangles();
        let seeds = SeedSet::from_pairs(&g, &[("a", "p"), ("z", "q")]).unwrap();
        for seed in 0..10 {
            let out = slp(&g, &seeds, seed, DEFAULT_MAX_SWEEPS);
            assert!(out.converged);
            let names: Vec<&str> = (0..6).map(|i| out.labeling.name_of(i)).collect();
            assert_eq!(names, vec!["p", "p", "p", "q", "q", "q"]);
        }
    }

    #[test]
    fn slp_unreachable_component_gets_a_label() {
        let g = parse_edge_list("a b\nx y\n").unwrap();
        let seeds = SeedSet::from_pairs(&g, &[("a", "p"), ("b", "q")]).unwrap();
        let out = slp(&g, &seeds, 3, 10);
        assert!(out.labeling.assignments.iter().all(|a| a.community().is_some()));
    }
}
