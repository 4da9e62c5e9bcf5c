//! Error rate, NMI and the repeated-trial experiment harness.

use std::collections::HashMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{lpa, slp};
use crate::belief::LabelFrame;
use crate::benchgen::{generate_planted, PlantedConfig};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::{Assignment, Labeling};
use crate::selp::{propagate, SeedSet, SelpConfig};

/// Reference community of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    frame: LabelFrame,
    membership: Vec<usize>,
}

impl GroundTruth {
    pub fn new(frame: LabelFrame, membership: Vec<usize>) -> Result<Self> {
        if let Some(&k) = membership.iter().find(|&&k| k >= frame.len()) {
            return Err(Error::FrameMismatch(format!("community index {k} outside frame")));
        }
        Ok(GroundTruth { frame, membership })
    }

    /// Builds from `(node_id, community)` pairs covering every node of `g`.
    /// Communities are ordered by first appearance.
    pub fn from_pairs<S: AsRef<str>>(g: &Graph, pairs: &[(S, S)]) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut slot: HashMap<&str, usize> = HashMap::new();
        let mut membership = vec![usize::MAX; g.node_count()];
        for (node, label) in pairs {
            let i = g.require_index(node.as_ref())?;
            let k = *slot.entry(label.as_ref()).or_insert_with(|| {
                labels.push(label.as_ref().to_string());
                labels.len() - 1
            });
            if membership[i] != usize::MAX && membership[i] != k {
                return Err(Error::InputMismatch(format!(
                    "node `{}` assigned to two communities",
                    node.as_ref()
                )));
            }
            membership[i] = k;
        }
        let missing: Vec<String> = (0..g.node_count())
            .filter(|&i| membership[i] == usize::MAX)
            .map(|i| g.id(i).to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Coverage(missing));
        }
        Self::new(LabelFrame::new(labels)?, membership)
    }

    pub fn frame(&self) -> &LabelFrame {
        &self.frame
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    pub fn label_of(&self, node: usize) -> &str {
        self.frame.label(self.membership[node])
    }

    pub fn community_count(&self) -> usize {
        self.frame.len()
    }

    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.membership[i] == k).collect()
    }

    /// Seeds consisting of the given nodes with their true communities.
    pub fn seeds_from_nodes(&self, nodes: &[usize]) -> Result<SeedSet> {
        let assignments = nodes.iter().map(|&i| (i, self.membership[i])).collect();
        SeedSet::new(self.frame.clone(), assignments, self.len())
    }

    /// Draws `per_community` distinct seeds uniformly from each community.
    pub fn sample_seeds<R: rand::Rng>(&self, per_community: usize, rng: &mut R) -> Result<SeedSet> {
        if per_community == 0 {
            return Err(Error::Config("at least one labeled node per community is required".into()));
        }
        let mut nodes = Vec::with_capacity(per_community * self.community_count());
        for k in 0..self.community_count() {
            let members = self.members(k);
            if members.len() < per_community {
                return Err(Error::Config(format!(
                    "community `{}` has {} nodes, fewer than the {per_community} requested seeds",
                    self.frame.label(k),
                    members.len()
                )));
            }
            nodes.extend(members.choose_multiple(rng, per_community).copied());
        }
        self.seeds_from_nodes(&nodes)
    }
}

/// How predicted communities are matched to true ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// Predicted and true labels share names.
    ByName,
    /// Error-minimizing one-to-one matching: exhaustive up to
    /// [`EXHAUSTIVE_ALIGNMENT_LIMIT`] blocks, greedy beyond.
    BestBijection,
}

pub const EXHAUSTIVE_ALIGNMENT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub rate: f64,
    pub evaluated: usize,
    pub misclassified: Vec<usize>,
    pub outliers: Vec<usize>,
}

/// Fraction of evaluated nodes labeled differently from the truth.
///
/// Seeds and outliers are not evaluated; outliers are reported separately.
pub fn error_rate(
    predicted: &Labeling,
    truth: &GroundTruth,
    seeds: Option<&SeedSet>,
    alignment: Alignment,
) -> Result<ErrorReport> {
    if predicted.len() != truth.len() {
        return Err(Error::InputMismatch(format!(
            "prediction covers {} nodes, ground truth {}",
            predicted.len(),
            truth.len()
        )));
    }
    let outliers = predicted.outliers();
    let evaluated: Vec<(usize, usize)> = (0..predicted.len())
        .filter(|&i| !seeds.is_some_and(|s| s.contains(i)))
        .filter_map(|i| predicted.assignments[i].community().map(|k| (i, k)))
        .collect();
    if evaluated.is_empty() {
        return Err(Error::UndefinedMetric(
            "no node left to evaluate after removing seeds and outliers".into(),
        ));
    }
    let mapping: Vec<Option<usize>> = match alignment {
        Alignment::ByName => predicted
            .frame
            .labels()
            .iter()
            .map(|l| truth.frame().index_of(l))
            .collect(),
        Alignment::BestBijection => best_bijection(predicted.frame.len(), truth, &evaluated),
    };
    let misclassified: Vec<usize> = evaluated
        .iter()
        .filter(|&&(i, k)| mapping[k] != Some(truth.membership()[i]))
        .map(|&(i, _)| i)
        .collect();
    Ok(ErrorReport {
        rate: misclassified.len() as f64 / evaluated.len() as f64,
        evaluated: evaluated.len(),
        misclassified,
        outliers,
    })
}

/// Matching from predicted label index to true label index maximizing
/// agreement on `evaluated`.
fn best_bijection(predicted_labels: usize, truth: &GroundTruth, evaluated: &[(usize, usize)]) -> Vec<Option<usize>> {
    // compress to predicted labels that actually occur
    let mut rows: Vec<usize> = evaluated.iter().map(|&(_, k)| k).collect();
    rows.sort_unstable();
    rows.dedup();
    let cols = truth.community_count();
    let mut table = vec![vec![0usize; cols]; rows.len()];
    for &(i, k) in evaluated {
        let r = rows.binary_search(&k).expect("row present");
        table[r][truth.membership()[i]] += 1;
    }
    let size = rows.len().max(cols);
    let mut mapping = vec![None; predicted_labels];
    if size <= EXHAUSTIVE_ALIGNMENT_LIMIT {
        let cell = |r: usize, c: usize| {
            if r < rows.len() && c < cols {
                table[r][c]
            } else {
                0
            }
        };
        let mut perm: Vec<usize> = (0..size).collect();
        let mut best_perm = perm.clone();
        let mut best = (0..size).map(|r| cell(r, perm[r])).sum::<usize>();
        // Heap's algorithm
        let mut counter = vec![0usize; size];
        let mut i = 0;
        while i < size {
            if counter[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(counter[i], i);
                }
                let score = (0..size).map(|r| cell(r, perm[r])).sum::<usize>();
                if score > best {
                    best = score;
                    best_perm = perm.clone();
                }
                counter[i] += 1;
                i = 0;
            } else {
                counter[i] = 0;
                i += 1;
            }
        }
        for (r, &label) in rows.iter().enumerate() {
            if best_perm[r] < cols {
                mapping[label] = Some(best_perm[r]);
            }
        }
    } else {
        let mut cells: Vec<(usize, usize, usize)> = Vec::new();
        for (r, row) in table.iter().enumerate() {
            for (c, &count) in row.iter().enumerate() {
                if count > 0 {
                    cells.push((count, r, c));
                }
            }
        }
        cells.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut row_used = vec![false; rows.len()];
        let mut col_used = vec![false; cols];
        for (_, r, c) in cells {
            if !row_used[r] && !col_used[c] {
                row_used[r] = true;
                col_used[c] = true;
                mapping[rows[r]] = Some(c);
            }
        }
    }
    mapping
}

/// Normalized mutual information, `2 I(a; b) / (H(a) + H(b))`, natural
/// log, `0 log 0 = 0`. Two single-block partitions score 1.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InputMismatch(format!(
            "partitions cover {} and {} nodes",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::UndefinedMetric("empty partitions".into()));
    }
    let n = a.len() as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut count_a: HashMap<usize, usize> = HashMap::new();
    let mut count_b: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0) += 1;
        *count_a.entry(x).or_insert(0) += 1;
        *count_b.entry(y).or_insert(0) += 1;
    }
    // Terms are summed in sorted order so the result does not depend on
    // argument order or label names.
    let sorted_sum = |mut terms: Vec<f64>| {
        terms.sort_by(|p, q| p.total_cmp(q));
        terms.into_iter().sum::<f64>()
    };
    let entropy = |counts: &HashMap<usize, usize>| {
        sorted_sum(
            counts
                .values()
                .map(|&c| {
                    let p = c as f64 / n;
                    -p * p.ln()
                })
                .collect(),
        )
    };
    let (ha, hb) = (entropy(&count_a), entropy(&count_b));
    if ha + hb == 0.0 {
        return Ok(1.0);
    }
    let mi = sorted_sum(
        joint
            .iter()
            .map(|(&(x, y), &c)| {
                let c = c as f64;
                let expected = count_a[&x] as f64 * count_b[&y] as f64;
                c / n * (n * c / expected).ln()
            })
            .collect(),
    );
    Ok((2.0 * mi / (ha + hb)).clamp(0.0, 1.0))
}

/// A detector the harness can run.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Selp(SelpConfig),
    Slp { max_sweeps: usize },
    Lpa { max_sweeps: usize },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Selp(_) => "selp",
            Algorithm::Slp { .. } => "slp",
            Algorithm::Lpa { .. } => "lpa",
        }
    }

    /// Runs on `g`. `seeds` is ignored by LPA; `rng_seed` feeds whichever
    /// randomness the algorithm has.
    pub fn detect(&self, g: &Graph, seeds: &SeedSet, rng_seed: u64) -> Result<Labeling> {
        match self {
            Algorithm::Selp(cfg) => {
                let cfg = SelpConfig {
                    rng_seed,
                    ..cfg.clone()
                };
                Ok(propagate(g, seeds, &cfg)?.labeling())
            }
            Algorithm::Slp { max_sweeps } => Ok(slp(g, seeds, rng_seed, *max_sweeps).labeling),
            Algorithm::Lpa { max_sweeps } => Ok(lpa(g, rng_seed, *max_sweeps).labeling(g)),
        }
    }

    fn alignment(&self) -> Alignment {
        match self {
            Algorithm::Lpa { .. } => Alignment::BestBijection,
            _ => Alignment::ByName,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub algorithm: String,
    pub group: f64,
    pub labeled_per_community: usize,
    pub trial: usize,
    pub trial_seed: u64,
    /// `None` when every non-seed node is an outlier.
    pub error_rate: Option<f64>,
    pub nmi: f64,
    pub outliers: Vec<String>,
    pub misclassified: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub group: f64,
    pub algorithm: String,
    pub trials: usize,
    /// Trials left out of the error statistics because their rate is undefined.
    pub undefined_error_trials: usize,
    pub mean_error: f64,
    pub sd_error: f64,
    pub mean_nmi: f64,
    pub sd_nmi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub summaries: Vec<SweepSummary>,
    pub trials: Vec<TrialReport>,
}

/// Normalization recorded alongside sweep outputs.
pub const NMI_NORMALIZATION: &str = "arithmetic-mean";

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `trial` under `base_seed`; shared by every algorithm in
/// that trial.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    splitmix64(base_seed.wrapping_add(trial as u64))
}

/// Scores one labeling of `g` against `truth`.
pub fn score_trial(
    g: &Graph,
    truth: &GroundTruth,
    algorithm: &Algorithm,
    seeds: &SeedSet,
    predicted: &Labeling,
) -> Result<(Option<ErrorReport>, f64)> {
    let report = match error_rate(predicted, truth, Some(seeds), algorithm.alignment()) {
        Ok(r) => Some(r),
        Err(Error::UndefinedMetric(_)) => None,
        Err(e) => return Err(e),
    };
    let value = nmi(truth.membership(), &predicted.block_ids())?;
    debug_assert_eq!(predicted.len(), g.node_count());
    Ok((report, value))
}

fn run_one_trial(
    g: &Graph,
    truth: &GroundTruth,
    algorithms: &[Algorithm],
    per_community: usize,
    group: f64,
    trial: usize,
    seed: u64,
) -> Result<Vec<TrialReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds = truth.sample_seeds(per_community, &mut rng)?;
    algorithms
        .iter()
        .map(|alg| {
            let predicted = alg.detect(g, &seeds, seed)?;
            let (report, value) = score_trial(g, truth, alg, &seeds, &predicted)?;
            let ids = |nodes: &[usize]| nodes.iter().map(|&i| g.id(i).to_string()).collect();
            Ok(TrialReport {
                algorithm: alg.name().to_string(),
                group,
                labeled_per_community: per_community,
                trial,
                trial_seed: seed,
                error_rate: report.as_ref().map(|r| r.rate),
                nmi: value,
                outliers: ids(&predicted.outliers()),
                misclassified: report.map_or_else(Vec::new, |r| ids(&r.misclassified)),
            })
        })
        .collect()
}

fn check_plan(algorithms: &[Algorithm], trials: usize) -> Result<()> {
    if algorithms.is_empty() {
        return Err(Error::Config("no algorithm selected".into()));
    }
    if trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    Ok(())
}

/// Repeated trials on a fixed graph for each labeled-per-community count.
///
/// Trial `t` draws its seed nodes from `trial_seed(base_seed, t)`; every
/// algorithm in the trial sees the same draw.
pub fn run_sweep(
    g: &Graph,
    truth: &GroundTruth,
    algorithms: &[Algorithm],
    labeled_counts: &[usize],
    trials: usize,
    base_seed: u64,
) -> Result<SweepOutput> {
    check_plan(algorithms, trials)?;
    if truth.len() != g.node_count() {
        return Err(Error::InputMismatch("ground truth does not match graph".into()));
    }
    let mut reports = Vec::new();
    for &count in labeled_counts {
        let batch: Vec<Vec<TrialReport>> = (0..trials)
            .into_par_iter()
            .map(|t| run_one_trial(g, truth, algorithms, count, count as f64, t, trial_seed(base_seed, t)))
            .collect::<Result<_>>()?;
        reports.extend(batch.into_iter().flatten());
    }
    Ok(SweepOutput {
        summaries: summarize(&reports),
        trials: reports,
    })
}

/// Repeated trials on freshly generated planted graphs for each mixing
/// value. The graph of trial `t` at the `i`-th mixing value is generated
/// from `trial_seed(trial_seed(base_seed, t), i)`.
pub fn run_mu_sweep(
    base: &PlantedConfig,
    mus: &[f64],
    labeled_per_community: usize,
    algorithms: &[Algorithm],
    trials: usize,
    base_seed: u64,
) -> Result<SweepOutput> {
    check_plan(algorithms, trials)?;
    let mut reports = Vec::new();
    for (mi, &mu) in mus.iter().enumerate() {
        let batch: Vec<Vec<TrialReport>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(base_seed, t);
                let cfg = PlantedConfig {
                    mu,
                    rng_seed: trial_seed(seed, mi),
                    ..base.clone()
                };
                let bench = generate_planted(&cfg)?;
                run_one_trial(&bench.graph, &bench.truth, algorithms, labeled_per_community, mu, t, seed)
            })
            .collect::<Result<_>>()?;
        reports.extend(batch.into_iter().flatten());
    }
    Ok(SweepOutput {
        summaries: summarize(&reports),
        trials: reports,
    })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean and sample standard deviation per (group, algorithm), in order of
/// first appearance. A single trial has standard deviation 0.
pub fn summarize(reports: &[TrialReport]) -> Vec<SweepSummary> {
    let mut keys: Vec<(f64, &str)> = Vec::new();
    for r in reports {
        let key = (r.group, r.algorithm.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(group, algorithm)| {
            let rows: Vec<&TrialReport> = reports
                .iter()
                .filter(|r| r.group == group && r.algorithm == algorithm)
                .collect();
            let errors: Vec<f64> = rows.iter().filter_map(|r| r.error_rate).collect();
            let nmis: Vec<f64> = rows.iter().map(|r| r.nmi).collect();
            let (mean_error, sd_error) = mean_sd(&errors);
            let (mean_nmi, sd_nmi) = mean_sd(&nmis);
            SweepSummary {
                group,
                algorithm: algorithm.to_string(),
                trials: rows.len(),
                undefined_error_trials: rows.len() - errors.len(),
                mean_error,
                sd_error,
                mean_nmi,
                sd_nmi,
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(summaries: &[SweepSummary], mut out: W) -> Result<()> {
    writeln!(out, "group,algorithm,trials,mean_error,sd_error,mean_nmi,sd_nmi")?;
    for s in summaries {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.group, s.algorithm, s.trials, s.mean_error, s.sd_error, s.mean_nmi, s.sd_nmi
        )?;
    }
    Ok(())
}

pub fn write_trials_csv<W: Write>(reports: &[TrialReport], mut out: W) -> Result<()> {
    writeln!(
        out,
        "group,algorithm,labeled_per_community,trial,trial_seed,error_rate,nmi,outliers,misclassified"
    )?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.group,
            r.algorithm,
            r.labeled_per_community,
            r.trial,
            r.trial_seed,
            r.error_rate.map_or_else(String::new, |e| e.to_string()),
            r.nmi,
            r.outliers.join(";"),
            r.misclassified.join(";")
        )?;
    }
    Ok(())
}

/// Whether every node's prediction agrees with the truth by name.
pub fn is_exact(predicted: &Labeling, truth: &GroundTruth) -> bool {
    predicted.len() == truth.len()
        && (0..truth.len()).all(|i| match predicted.assignments[i] {
            Assignment::Community(k) => predicted.frame.label(k) == truth.label_of(i),
            Assignment::Outlier => false,
        })
}
