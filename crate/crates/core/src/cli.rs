//! Command-line front end.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::baselines::{lpa, slp, DEFAULT_MAX_SWEEPS};
use crate::benchgen::{generate_planted, load_labeled_benchmark_files, mean_degree, realized_mixing, save_benchmark, PlantedConfig};
use crate::datasets;
use crate::error::Error;
use crate::eval::{
    error_rate, run_mu_sweep, run_sweep, write_summary_csv, write_trials_csv, Algorithm, Alignment, GroundTruth,
    SweepOutput, NMI_NORMALIZATION,
};
use crate::graph::{load_edge_list, parse_gml, Graph};
use crate::selp::{parse_inline_seeds, parse_seed_file, propagate, ClosingPass, Gamma, SeedSet, SelpConfig, TieBreak};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "selp", version, about = "Evidential semi-supervised community detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label the nodes of one graph.
    Detect(DetectArgs),
    /// Repeated randomized trials over labeled counts or mixing values.
    Experiment(ExperimentArgs),
    /// Write a planted-partition benchmark to disk.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoName {
    Selp,
    Slp,
    Lpa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreakArg {
    Lowest,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosingArg {
    UntilStable,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Karate,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphSource {
    /// Edge list (or `.gml`) file.
    #[arg(long, conflicts_with = "dataset")]
    pub graph: Option<PathBuf>,
    /// Embedded dataset.
    #[arg(long, value_enum)]
    pub dataset: Option<DatasetName>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelpFlags {
    #[arg(long, default_value_t = 0.7)]
    pub eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    /// `auto` or a positive number.
    #[arg(long, default_value = "auto")]
    pub gamma: String,
    #[arg(long, value_enum, default_value_t = TieBreakArg::Lowest)]
    pub tie_break: TieBreakArg,
    #[arg(long, value_enum, default_value_t = ClosingArg::UntilStable)]
    pub closing: ClosingArg,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    /// Sweep cap for the LPA/SLP baselines.
    #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
    pub max_sweeps: usize,
}

impl SelpFlags {
    fn config(&self, rng_seed: u64) -> Result<SelpConfig, Error> {
        let gamma = match self.gamma.trim() {
            "auto" | "AUTO" => Gamma::Auto,
            v => Gamma::Fixed(
                v.parse()
                    .map_err(|_| Error::param("gamma", format!("`{v}` is neither `auto` nor a number")))?,
            ),
        };
        let cfg = SelpConfig {
            alpha0: self.alpha0,
            beta: self.beta,
            gamma,
            eta: self.eta,
            max_iterations: self.max_iterations,
            tie_break: match self.tie_break {
                TieBreakArg::Lowest => TieBreak::LowestLabel,
                TieBreakArg::Random => TieBreak::SeededRandom,
            },
            closing: match self.closing {
                ClosingArg::UntilStable => ClosingPass::UntilStable,
                ClosingArg::Single => ClosingPass::SingleDecision,
            },
            rng_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Inline seeds `id:label,id:label`; wins over --seeds-file.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Seeds file with `node_id label` lines.
    #[arg(long)]
    pub seeds_file: Option<PathBuf>,
    #[arg(long = "algo", value_enum, default_value_t = AlgoName::Selp)]
    pub algorithm: AlgoName,
    #[command(flatten)]
    pub selp: SelpFlags,
    /// RNG seed for random tie-breaks and the baselines.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit JSON records instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlantedFlags {
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 15.0)]
    pub avg_degree: f64,
    #[arg(long, default_value_t = 20)]
    pub cmin: usize,
    #[arg(long, default_value_t = 50)]
    pub cmax: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Community file (`node_id community`) accompanying --graph.
    #[arg(long, requires = "graph")]
    pub communities: Option<PathBuf>,
    /// Sweep over mixing values on generated planted graphs.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["graph", "dataset"])]
    pub mu_list: Option<Vec<f64>>,
    #[command(flatten)]
    pub planted: PlantedFlags,
    #[arg(long = "algos", value_enum, value_delimiter = ',', default_value = "selp,slp")]
    pub algorithms: Vec<AlgoName>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub labeled_per_community: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Base seed; trial seeds derive from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub selp: SelpFlags,
    /// Summary output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional per-trial CSV.
    #[arg(long)]
    pub detail: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 15.0)]
    pub avg_degree: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long, default_value_t = 20)]
    pub cmin: usize,
    #[arg(long, default_value_t = 50)]
    pub cmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<InputFingerprint>,
    pub rng_seeds: Vec<u64>,
    pub tool_version: String,
    pub notes: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct InputFingerprint {
    pub path: String,
    pub sha256: String,
}

fn fingerprint(path: &Path) -> Result<InputFingerprint, Error> {
    let bytes = std::fs::read(path)?;
    Ok(InputFingerprint {
        path: path.display().to_string(),
        sha256: format!("{:x}", Sha256::digest(&bytes)),
    })
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: if e.is_runtime() { EXIT_RUNTIME } else { EXIT_INPUT },
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, CliError>;

fn load_graph(path: &Path) -> Result<Graph, Error> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gml")) {
        parse_gml(&std::fs::read_to_string(path)?)
    } else {
        load_edge_list(BufReader::new(File::open(path)?))
    }
}

struct LoadedGraph {
    graph: Graph,
    truth: Option<GroundTruth>,
    inputs: Vec<InputFingerprint>,
}

fn resolve_source(source: &GraphSource, communities: Option<&Path>) -> CliResult<LoadedGraph> {
    match (&source.graph, source.dataset) {
        (Some(path), _) => {
            let mut inputs = vec![fingerprint(path)?];
            let (graph, truth) = match communities {
                Some(c) => {
                    inputs.push(fingerprint(c)?);
                    let (g, t) = load_labeled_benchmark_files(path, c)?;
                    (g, Some(t))
                }
                None => (load_graph(path)?, None),
            };
            Ok(LoadedGraph { graph, truth, inputs })
        }
        (None, Some(DatasetName::Karate)) => {
            let (graph, truth) = datasets::by_name("karate").expect("embedded dataset");
            Ok(LoadedGraph {
                graph,
                truth: Some(truth),
                inputs: Vec::new(),
            })
        }
        (None, None) => Err(input_error("one of --graph or --dataset is required")),
    }
}

/// Writes `body` to `path` or stdout, and the manifest next to it (or to
/// stderr when writing to stdout).
fn emit(path: Option<&Path>, body: &[u8], manifest: &RunManifest) -> CliResult<()> {
    let manifest_text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(Error::from)?;
            }
            std::fs::write(p, body).map_err(Error::from)?;
            let mut mpath = p.as_os_str().to_owned();
            mpath.push(".manifest.json");
            std::fs::write(PathBuf::from(mpath), manifest_text).map_err(Error::from)?;
        }
        None => {
            std::io::stdout().write_all(body).map_err(Error::from)?;
            eprintln!("{manifest_text}");
        }
    }
    Ok(())
}

fn parameters<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn tool_version() -> String {
    format!("selp {}", env!("CARGO_PKG_VERSION"))
}

pub fn cmd_detect(args: &DetectArgs) -> CliResult<()> {
    let loaded = resolve_source(&args.source, None)?;
    let g = &loaded.graph;
    let mut inputs = loaded.inputs;

    let seed_pairs = match (&args.seeds, &args.seeds_file) {
        (Some(inline), file) => {
            if file.is_some() {
                eprintln!("warning: both --seeds and --seeds-file given; using --seeds");
            }
            Some(parse_inline_seeds(inline)?)
        }
        (None, Some(path)) => {
            inputs.push(fingerprint(path)?);
            Some(parse_seed_file(BufReader::new(File::open(path).map_err(Error::from)?))?)
        }
        (None, None) => None,
    };
    let seeds = match (args.algorithm, seed_pairs) {
        (AlgoName::Lpa, pairs) => {
            if pairs.is_some() {
                eprintln!("warning: lpa is unsupervised; seeds are ignored");
            }
            None
        }
        (_, Some(pairs)) => Some(SeedSet::from_pairs(g, &pairs)?),
        (_, None) => return Err(input_error("this algorithm needs --seeds or --seeds-file")),
    };

    let mut notes = serde_json::Map::new();
    let body = match args.algorithm {
        AlgoName::Selp => {
            let cfg = args.selp.config(args.seed)?;
            let seeds = seeds.expect("checked above");
            let result = propagate(g, &seeds, &cfg)?;
            notes.insert("gamma".into(), result.gamma.into());
            notes.insert("iterations".into(), result.iterations.into());
            notes.insert("hit_iteration_cap".into(), result.hit_iteration_cap.into());
            let outliers: Vec<&str> = result.outliers().iter().map(|&i| g.id(i)).collect();
            eprintln!(
                "selp: {} sweeps, {} closing rounds, outliers: {}",
                result.iterations,
                result.closing_rounds,
                if outliers.is_empty() { "none".to_string() } else { outliers.join(", ") }
            );
            if let Some(truth) = &loaded.truth {
                report_against_truth(g, truth, &result.labeling(), Some(&seeds), Alignment::ByName);
            }
            if args.json {
                serde_json::to_vec_pretty(&result.to_json(g)).expect("json")
            } else {
                let mut buf = Vec::new();
                result.write_csv(g, &mut buf)?;
                buf
            }
        }
        AlgoName::Slp => {
            let seeds = seeds.expect("checked above");
            let out = slp(g, &seeds, args.seed, args.selp.max_sweeps);
            notes.insert("sweeps".into(), out.sweeps.into());
            notes.insert("converged".into(), out.converged.into());
            if let Some(truth) = &loaded.truth {
                report_against_truth(g, truth, &out.labeling, Some(&seeds), Alignment::ByName);
            }
            labeling_body(g, &out.labeling, args.json)?
        }
        AlgoName::Lpa => {
            let out = lpa(g, args.seed, args.selp.max_sweeps);
            notes.insert("sweeps".into(), out.sweeps.into());
            notes.insert("converged".into(), out.converged.into());
            let labeling = out.labeling(g);
            if let Some(truth) = &loaded.truth {
                report_against_truth(g, truth, &labeling, None, Alignment::BestBijection);
            }
            labeling_body(g, &labeling, args.json)?
        }
    };

    let manifest = RunManifest {
        command: "detect".into(),
        parameters: parameters(args),
        inputs,
        rng_seeds: vec![args.seed],
        tool_version: tool_version(),
        notes: notes.into(),
    };
    emit(args.out.as_deref(), &body, &manifest)
}

fn labeling_body(g: &Graph, labeling: &crate::partition::Labeling, json: bool) -> CliResult<Vec<u8>> {
    if json {
        return Ok(serde_json::to_vec_pretty(&labeling.to_json(g)).expect("json"));
    }
    let mut buf = Vec::new();
    labeling.write_csv(g, &mut buf)?;
    Ok(buf)
}

fn report_against_truth(
    g: &Graph,
    truth: &GroundTruth,
    labeling: &crate::partition::Labeling,
    seeds: Option<&SeedSet>,
    alignment: Alignment,
) {
    if alignment == Alignment::ByName
        && !labeling
            .frame
            .labels()
            .iter()
            .all(|l| truth.frame().index_of(l).is_some())
    {
        return;
    }
    if let Ok(report) = error_rate(labeling, truth, seeds, alignment) {
        let ids: Vec<&str> = report.misclassified.iter().map(|&i| g.id(i)).collect();
        eprintln!(
            "error rate {:.4} over {} nodes; misclassified: {}",
            report.rate,
            report.evaluated,
            if ids.is_empty() { "none".to_string() } else { ids.join(", ") }
        );
    }
}

fn algorithms(names: &[AlgoName], flags: &SelpFlags) -> CliResult<Vec<Algorithm>> {
    let mut out = Vec::new();
    for name in names {
        out.push(match name {
            AlgoName::Selp => Algorithm::Selp(flags.config(0)?),
            AlgoName::Slp => Algorithm::Slp {
                max_sweeps: flags.max_sweeps,
            },
            AlgoName::Lpa => Algorithm::Lpa {
                max_sweeps: flags.max_sweeps,
            },
        });
    }
    Ok(out)
}

pub fn cmd_experiment(args: &ExperimentArgs) -> CliResult<()> {
    let algos = algorithms(&args.algorithms, &args.selp)?;
    let mut inputs = Vec::new();
    let output: SweepOutput = match &args.mu_list {
        Some(mus) => {
            if args.labeled_per_community.len() != 1 {
                return Err(input_error("a mixing sweep takes exactly one --labeled-per-community value"));
            }
            let base = PlantedConfig {
                n: args.planted.n,
                avg_degree: args.planted.avg_degree,
                mu: 0.0,
                cmin: args.planted.cmin,
                cmax: args.planted.cmax,
                rng_seed: 0,
            };
            base.validate()?;
            run_mu_sweep(&base, mus, args.labeled_per_community[0], &algos, args.trials, args.seed)?
        }
        None => {
            let loaded = resolve_source(&args.source, args.communities.as_deref())?;
            inputs = loaded.inputs;
            let truth = loaded
                .truth
                .ok_or_else(|| input_error("experiments need ground truth: use --dataset or --communities"))?;
            run_sweep(
                &loaded.graph,
                &truth,
                &algos,
                &args.labeled_per_community,
                args.trials,
                args.seed,
            )?
        }
    };

    let body = if args.json {
        serde_json::to_vec_pretty(&output.summaries).expect("json")
    } else {
        let mut buf = Vec::new();
        write_summary_csv(&output.summaries, &mut buf)?;
        buf
    };
    if let Some(detail) = &args.detail {
        let mut w = BufWriter::new(File::create(detail).map_err(Error::from)?);
        write_trials_csv(&output.trials, &mut w)?;
        w.flush().map_err(Error::from)?;
    }
    let mut notes = serde_json::Map::new();
    let undefined: usize = output.summaries.iter().map(|s| s.undefined_error_trials).sum();
    if undefined > 0 {
        eprintln!("warning: {undefined} trial runs left every non-seed node an outlier; their error rate is undefined and excluded from the means");
    }
    notes.insert("undefined_error_trials".into(), undefined.into());
    notes.insert("nmi_normalization".into(), NMI_NORMALIZATION.into());
    notes.insert("sd".into(), "sample (n-1)".into());
    notes.insert(
        "sweep_variable".into(),
        if args.mu_list.is_some() { "mu" } else { "labeled_per_community" }.into(),
    );
    let manifest = RunManifest {
        command: "experiment".into(),
        parameters: parameters(args),
        inputs,
        rng_seeds: vec![args.seed],
        tool_version: tool_version(),
        notes: notes.into(),
    };
    emit(args.out.as_deref(), &body, &manifest)
}

pub fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let cfg = PlantedConfig {
        n: args.n,
        avg_degree: args.avg_degree,
        mu: args.mu,
        cmin: args.cmin,
        cmax: args.cmax,
        rng_seed: args.seed,
    };
    let bench = generate_planted(&cfg)?;
    let stem = cfg.fingerprint();
    let (edge_path, comm_path) = save_benchmark(&bench.graph, &bench.truth, &args.out_dir, &stem)?;
    let mut notes = serde_json::Map::new();
    notes.insert("communities".into(), bench.community_sizes.len().into());
    notes.insert("components".into(), bench.component_count.into());
    notes.insert("edges".into(), bench.graph.edge_count().into());
    notes.insert("realized_mean_degree".into(), mean_degree(&bench.graph).into());
    notes.insert("realized_mixing".into(), realized_mixing(&bench.graph, &bench.truth).into());
    let manifest = RunManifest {
        command: "generate".into(),
        parameters: parameters(args),
        inputs: vec![fingerprint(&edge_path)?, fingerprint(&comm_path)?],
        rng_seeds: vec![args.seed],
        tool_version: tool_version(),
        notes: notes.into(),
    };
    let manifest_path = args.out_dir.join(format!("{stem}.manifest.json"));
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).expect("manifest"))
        .map_err(Error::from)?;
    eprintln!(
        "wrote {} and {} ({} nodes, {} edges, {} components)",
        edge_path.display(),
        comm_path.display(),
        bench.graph.node_count(),
        bench.graph.edge_count(),
        bench.component_count
    );
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Generate(a) => cmd_generate(a),
    }
}
