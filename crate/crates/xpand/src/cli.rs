//! The `xpand` command line.
//!
//! Every run records a [`RunManifest`]: next to `-o FILE` as
//! `FILE.manifest.json`, at `--manifest PATH`, or on stderr when output goes
//! to stdout. `xpand --replay MANIFEST` re-runs the recorded parameters and
//! fails with exit code 1 unless every output matches byte for byte.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xpand_core::expansion::{
    edge_expansion_exact_with, edge_expansion_heuristic, node_expansion_exact_with, node_expansion_heuristic, Mode,
    Search,
};
use xpand_core::faults::{apply_faults, attack_chain_centers, attack_greedy_cuts, FaultPattern};
use xpand_core::generators::{
    complete, cycle, hypercube_with, mesh_with, path, random_regular, subdivide_edges, MeshShape,
};
use xpand_core::pruning::{prune, prune2, shatter_uniform};
use xpand_core::span::{
    enumerate_compact_sets, sample_compact_set, span_exact, span_sampled, verify_mesh_span_certificate,
};
use xpand_core::{Graph, Limits, NodeSet};

use crate::experiments::{
    adversary_exhaustive, max_admissible_faults, oracle_alpha, parse_p_grid, results_csv, results_jsonl,
    run_experiment, summarize, summary_csv, verify_subgraph_count_bound, ExperimentSpec, FaultModel, PruneParams,
};
use crate::format::{
    graph_to_text, json_bytes, parse_rational, read_fault_pattern, read_graph, read_subdivided, write_bytes,
    ExpansionJson, FaultPatternJson, ShatterJson, SidecarJson, SpanJson, TraceJson,
};
use crate::manifest::{FileDigest, RunManifest, TOOL, VERSION};
use crate::suites::{compact_suite, loop_exit_suite};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "xpand",
    version,
    about = "Expansion, pruning and fault-resilience analysis of graphs"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "XPAND_THREADS")]
    pub threads: Option<usize>,

    /// Where to write the run manifest.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    /// Output file (default: stdout).
    #[arg(short = 'o', long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Re-run a recorded manifest and compare outputs byte for byte.
    #[arg(long, value_name = "MANIFEST")]
    pub replay: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a graph file.
    Gen(GenArgs),
    /// Node or edge expansion with a witness cut.
    Expansion(ExpansionArgs),
    /// Span: worst boundary-to-Steiner-tree ratio over compact sets.
    Span(SpanArgs),
    /// Node pruning of a faulty graph.
    Prune(PruneArgs),
    /// Edge pruning with compactification.
    Prune2(PruneArgs),
    /// Split the graph by sparse cuts until every piece is small.
    Shatter(ShatterArgs),
    /// Build an adversarial fault pattern.
    Attack(AttackArgs),
    /// Largest-component sweep over random faults (CSV).
    Percolate(PercolateArgs),
    /// Random faults followed by pruning (CSV).
    Resilience(ResilienceArgs),
    /// Prune against every fault set of a given size.
    Adversary(AdversaryArgs),
    /// Count connected subgraphs of a subdivided graph by base vertices.
    Census(CensusArgs),
    /// Check the virtual-boundary Steiner certificate on mesh compact sets.
    VerifyMeshSpan(VerifyMeshSpanArgs),
    /// Randomised check of the pruning exit conditions.
    CheckLoops(SuiteArgs),
    /// Randomised check of compactification.
    CheckCompact(SuiteArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Mesh,
    Hypercube,
    Cycle,
    Path,
    Complete,
    RandomRegular,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Mesh side lengths, e.g. `4x4`.
    #[arg(long)]
    pub dims: Option<String>,
    /// Node count (cycle, path, complete, random-regular).
    #[arg(long)]
    pub n: Option<usize>,
    /// Hypercube dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Degree for random-regular.
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replace every edge by a chain of K new nodes.
    #[arg(long, value_name = "K")]
    pub subdivide: Option<usize>,
    /// Sidecar for subdivided graphs (default: `<output>.meta.json`).
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionArgs {
    pub graph: PathBuf,
    /// Node expansion (default).
    #[arg(long, conflicts_with = "edge")]
    pub node: bool,
    #[arg(long)]
    pub edge: bool,
    /// Exact search (default).
    #[arg(long, conflicts_with = "heuristic")]
    pub exact: bool,
    #[arg(long)]
    pub heuristic: bool,
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanArgs {
    pub graph: PathBuf,
    /// Enumerate every compact set (default).
    #[arg(long, conflicts_with = "sample")]
    pub exact: bool,
    /// Sample N compact sets instead.
    #[arg(long, value_name = "N")]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneArgs {
    pub graph: PathBuf,
    /// Expansion of the fault-free graph, as num/den.
    #[arg(
        long,
        visible_alias = "alpha-e",
        required_unless_present = "oracle",
        conflicts_with = "oracle"
    )]
    pub alpha: Option<String>,
    /// Compute the threshold exactly from the fault-free graph.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub eps: String,
    /// Fault pattern file, or `empty`.
    #[arg(long, default_value = "empty")]
    pub faults: String,
    /// Heuristic sparse-cut search; the trace is then not certified.
    #[arg(long)]
    pub heuristic: bool,
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterArgs {
    pub graph: PathBuf,
    /// Target piece size as a fraction of n, num/den.
    #[arg(long)]
    pub eps_frac: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Fail the centre node of every chain of a subdivided graph.
    ChainCenters,
    /// Repeatedly fail the boundary of the sparsest cut.
    Greedy,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackArgs {
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub strategy: Strategy,
    /// Fault budget for the greedy strategy.
    #[arg(long, default_value_t = 1)]
    pub budget: usize,
    /// Subdivision sidecar (default: `<graph>.meta.json`).
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercolateArgs {
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "edge")]
    pub model: FaultModel,
    /// `a:b:step` or a comma-separated list.
    #[arg(long)]
    pub p_grid: String,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-point mean and standard deviation instead of per-trial rows.
    #[arg(long, conflicts_with = "jsonl")]
    pub summary: bool,
    /// Record wall time per trial (breaks byte-for-byte replay).
    #[arg(long)]
    pub timings: bool,
    /// JSON lines instead of CSV.
    #[arg(long)]
    pub jsonl: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneMode {
    Node,
    Edge,
}

impl From<PruneMode> for Mode {
    fn from(m: PruneMode) -> Mode {
        match m {
            PruneMode::Node => Mode::Node,
            PruneMode::Edge => Mode::Edge,
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResilienceArgs {
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "node")]
    pub model: FaultModel,
    #[arg(long)]
    pub p_grid: String,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `node` runs prune, `edge` runs prune2.
    #[arg(long, value_enum, default_value = "node")]
    pub mode: PruneMode,
    #[arg(long)]
    pub eps: String,
    #[arg(
        long,
        visible_alias = "alpha-e",
        required_unless_present = "oracle",
        conflicts_with = "oracle"
    )]
    pub alpha: Option<String>,
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub heuristic: bool,
    #[arg(long)]
    pub timings: bool,
    #[arg(long)]
    pub jsonl: bool,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryArgs {
    pub graph: PathBuf,
    /// Pruning runs with eps = 1 - 1/k.
    #[arg(long)]
    pub k: usize,
    /// Fault counts (default: every admissible count).
    #[arg(long, value_delimiter = ',')]
    pub f: Vec<usize>,
    /// Maximum number of fault sets per count.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusArgs {
    pub graph: PathBuf,
    /// Subdivision sidecar (default: `<graph>.meta.json`).
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub r_max: usize,
    /// Maximum number of connected sets enumerated.
    #[arg(long, default_value_t = 50_000_000)]
    pub cap: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyMeshSpanArgs {
    /// Mesh side lengths, e.g. `4x4`.
    #[arg(long)]
    pub dims: String,
    /// Every compact set (default).
    #[arg(long, conflicts_with = "sample")]
    pub exhaustive: bool,
    /// N sampled compact sets.
    #[arg(long, value_name = "N")]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 500)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 16)]
    pub max_nodes: usize,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Expansion(_) => "expansion",
            Command::Span(_) => "span",
            Command::Prune(_) => "prune",
            Command::Prune2(_) => "prune2",
            Command::Shatter(_) => "shatter",
            Command::Attack(_) => "attack",
            Command::Percolate(_) => "percolate",
            Command::Resilience(_) => "resilience",
            Command::Adversary(_) => "adversary",
            Command::Census(_) => "census",
            Command::VerifyMeshSpan(_) => "verify-mesh-span",
            Command::CheckLoops(_) => "check-loops",
            Command::CheckCompact(_) => "check-compact",
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        match self {
            Command::Gen(a) if a.family == Family::RandomRegular => vec![a.seed],
            Command::Expansion(a) if a.heuristic => vec![a.seed],
            Command::Span(a) if a.sample.is_some() => vec![a.seed],
            Command::Prune(a) | Command::Prune2(a) if a.heuristic => vec![a.seed],
            Command::Percolate(a) => vec![a.seed],
            Command::Resilience(a) => vec![a.seed],
            Command::VerifyMeshSpan(a) if a.sample.is_some() => vec![a.seed],
            Command::CheckLoops(a) | Command::CheckCompact(a) => vec![a.seed],
            _ => vec![],
        }
    }

    /// Fills in defaults that depend on other paths so the recorded
    /// parameters are complete.
    fn resolve(&mut self, output: Option<&Path>) {
        match self {
            Command::Gen(a) if a.subdivide.is_some() && a.meta.is_none() => {
                a.meta = output.map(sidecar_path);
            }
            Command::Attack(a) if a.strategy == Strategy::ChainCenters && a.meta.is_none() => {
                a.meta = Some(sidecar_path(&a.graph));
            }
            Command::Census(a) if a.meta.is_none() => a.meta = Some(sidecar_path(&a.graph)),
            _ => {}
        }
    }
}

fn sidecar_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub bytes: Vec<u8>,
    /// Side files, written next to the primary output.
    pub extras: Vec<(PathBuf, Vec<u8>)>,
    pub inputs: Vec<PathBuf>,
    /// Set when a check ran to completion and failed; output is still written.
    pub failure: Option<String>,
}

impl Outcome {
    fn new(bytes: Vec<u8>, inputs: Vec<PathBuf>) -> Self {
        Outcome {
            bytes,
            inputs,
            ..Outcome::default()
        }
    }

    fn fail_unless(mut self, ok: bool, msg: impl FnOnce() -> String) -> Self {
        if !ok {
            self.failure = Some(msg());
        }
        self
    }
}

pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    s.split(['x', ','])
        .map(|d| {
            d.trim()
                .parse::<usize>()
                .map_err(|_| Error::format(format!("bad mesh dimensions {s:?}")))
        })
        .collect()
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::format(format!("this family needs --{flag}")))
}

fn threshold(g: &Graph, alpha: &Option<String>, mode: Mode, limits: &Limits) -> Result<xpand_core::Rational> {
    match alpha {
        Some(a) => parse_rational(a),
        None => oracle_alpha(g, mode, limits),
    }
}

fn search(heuristic: bool, trials: usize, seed: u64) -> Search {
    if heuristic {
        Search::heuristic(trials, seed)
    } else {
        Search::exact()
    }
}

/// Runs one subcommand without touching the filesystem except for reads.
pub fn execute(cmd: &Command) -> Result<Outcome> {
    let limits = Limits::default();
    match cmd {
        Command::Gen(a) => {
            let g = match a.family {
                Family::Mesh => mesh_with(&parse_dims(&need(a.dims.clone(), "dims")?)?, &limits)?,
                Family::Hypercube => hypercube_with(need(a.dim, "dim")?, &limits)?,
                Family::Cycle => cycle(need(a.n, "n")?)?,
                Family::Path => path(need(a.n, "n")?)?,
                Family::Complete => complete(need(a.n, "n")?)?,
                Family::RandomRegular => random_regular(need(a.n, "n")?, need(a.degree, "degree")?, a.seed)?,
            };
            match a.subdivide {
                None => Ok(Outcome::new(graph_to_text(&g).into_bytes(), vec![])),
                Some(k) => {
                    let h = subdivide_edges(&g, k)?;
                    let mut out = Outcome::new(graph_to_text(&h.graph).into_bytes(), vec![]);
                    if let Some(meta) = &a.meta {
                        out.extras
                            .push((meta.clone(), json_bytes(&SidecarJson::from_subdivided(&h))?));
                    }
                    Ok(out)
                }
            }
        }
        Command::Expansion(a) => {
            let g = read_graph(&a.graph)?;
            let r = match (a.edge, a.heuristic) {
                (false, false) => node_expansion_exact_with(&g, &limits)?,
                (true, false) => edge_expansion_exact_with(&g, &limits)?,
                (false, true) => node_expansion_heuristic(&g, a.trials, a.seed)?,
                (true, true) => edge_expansion_heuristic(&g, a.trials, a.seed)?,
            };
            Ok(Outcome::new(
                json_bytes(&ExpansionJson::from(&r))?,
                vec![a.graph.clone()],
            ))
        }
        Command::Span(a) => {
            let g = read_graph(&a.graph)?;
            let r = match a.sample {
                None => span_exact(&g, &limits)?,
                Some(t) => span_sampled(&g, t, a.seed, &limits)?,
            };
            Ok(Outcome::new(json_bytes(&SpanJson::from(&r))?, vec![a.graph.clone()]))
        }
        Command::Prune(a) | Command::Prune2(a) => {
            let node = matches!(cmd, Command::Prune(_));
            let g = read_graph(&a.graph)?;
            let mut inputs = vec![a.graph.clone()];
            let pattern = if a.faults == "empty" {
                FaultPattern::nodes(g.n(), NodeSet::new())
            } else {
                inputs.push(PathBuf::from(&a.faults));
                read_fault_pattern(Path::new(&a.faults))?
            };
            let g_f = apply_faults(&g, &pattern)?;
            let eps = parse_rational(&a.eps)?;
            let s = search(a.heuristic, a.trials, a.seed);
            let trace = if node {
                prune(&g_f, threshold(&g, &a.alpha, Mode::Node, &limits)?, eps, &s)?
            } else {
                prune2(&g_f, threshold(&g, &a.alpha, Mode::Edge, &limits)?, eps, &s)?
            };
            Ok(Outcome::new(json_bytes(&TraceJson::from(&trace))?, inputs))
        }
        Command::Shatter(a) => {
            let g = read_graph(&a.graph)?;
            let frac = parse_rational(&a.eps_frac)?;
            let out = shatter_uniform(&g, frac, &limits)?;
            Ok(Outcome::new(
                json_bytes(&ShatterJson::new(frac, &out))?,
                vec![a.graph.clone()],
            ))
        }
        Command::Attack(a) => {
            let (pattern, inputs) = match a.strategy {
                Strategy::ChainCenters => {
                    let meta = a.meta.clone().unwrap_or_else(|| sidecar_path(&a.graph));
                    let h = read_subdivided(&a.graph, &meta)?;
                    (attack_chain_centers(&h)?, vec![a.graph.clone(), meta])
                }
                Strategy::Greedy => {
                    let g = read_graph(&a.graph)?;
                    (attack_greedy_cuts(&g, a.budget, &limits)?, vec![a.graph.clone()])
                }
            };
            Ok(Outcome::new(json_bytes(&FaultPatternJson::from(&pattern))?, inputs))
        }
        Command::Percolate(a) => {
            let g = read_graph(&a.graph)?;
            let spec = ExperimentSpec {
                model: a.model,
                p_grid: parse_p_grid(&a.p_grid)?,
                trials: a.trials,
                seed_base: a.seed,
                prune: None,
                timings: a.timings,
            };
            let results = run_experiment(&g, &spec)?;
            let bytes = if a.summary {
                summary_csv(&summarize(&results))?
            } else if a.jsonl {
                results_jsonl(&results)?
            } else {
                results_csv(&results)?
            };
            Ok(Outcome::new(bytes, vec![a.graph.clone()]))
        }
        Command::Resilience(a) => {
            let g = read_graph(&a.graph)?;
            let mode = Mode::from(a.mode);
            let spec = ExperimentSpec {
                model: a.model,
                p_grid: parse_p_grid(&a.p_grid)?,
                trials: a.trials,
                seed_base: a.seed,
                prune: Some(PruneParams {
                    mode,
                    threshold: threshold(&g, &a.alpha, mode, &limits)?,
                    eps: parse_rational(&a.eps)?,
                    search: search(a.heuristic, 32, a.seed),
                }),
                timings: a.timings,
            };
            let results = run_experiment(&g, &spec)?;
            let bytes = if a.jsonl {
                results_jsonl(&results)?
            } else {
                results_csv(&results)?
            };
            Ok(Outcome::new(bytes, vec![a.graph.clone()]))
        }
        Command::Adversary(a) => {
            let g = read_graph(&a.graph)?;
            let counts = if a.f.is_empty() {
                let alpha = node_expansion_exact_with(&g, &limits)?.value;
                (0..=max_admissible_faults(g.n(), alpha, a.k.max(1))).collect()
            } else {
                a.f.clone()
            };
            let reports = counts
                .iter()
                .map(|&f| adversary_exhaustive(&g, f, a.k, a.budget, &limits))
                .collect::<Result<Vec<_>>>()?;
            let bad: Vec<usize> = reports.iter().filter(|r| !r.ok()).map(|r| r.f).collect();
            Ok(Outcome::new(json_bytes(&reports)?, vec![a.graph.clone()])
                .fail_unless(bad.is_empty(), || format!("guarantees violated for f in {bad:?}")))
        }
        Command::Census(a) => {
            let meta = a.meta.clone().unwrap_or_else(|| sidecar_path(&a.graph));
            let h = read_subdivided(&a.graph, &meta)?;
            let rows = verify_subgraph_count_bound(&h, a.r_max, a.cap)?;
            let bad: Vec<usize> = rows.iter().filter(|r| !r.ok).map(|r| r.r).collect();
            Ok(Outcome::new(json_bytes(&rows)?, vec![a.graph.clone(), meta])
                .fail_unless(bad.is_empty(), || format!("count bound exceeded for r in {bad:?}")))
        }
        Command::VerifyMeshSpan(a) => verify_mesh_span(a, &limits),
        Command::CheckLoops(a) => {
            let r = loop_exit_suite(a.instances, a.seed, a.max_nodes)?;
            let ok = r.ok();
            Ok(Outcome::new(json_bytes(&r)?, vec![]).fail_unless(ok, || "pruning exit conditions violated".into()))
        }
        Command::CheckCompact(a) => {
            let r = compact_suite(a.instances, a.seed, a.max_nodes)?;
            let ok = r.ok();
            Ok(Outcome::new(json_bytes(&r)?, vec![]).fail_unless(ok, || "compactify property violated".into()))
        }
    }
}

fn verify_mesh_span(a: &VerifyMeshSpanArgs, limits: &Limits) -> Result<Outcome> {
    let dims = parse_dims(&a.dims)?;
    let g = MeshShape::new(&dims, limits)?.graph();
    let (sets, how) = match a.sample {
        None => (enumerate_compact_sets(&g, limits)?, "exhaustive".to_string()),
        Some(want) => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut sets = Vec::with_capacity(want);
            let mut attempts = 0usize;
            while sets.len() < want && attempts < want.saturating_mul(100).max(100) {
                attempts += 1;
                if let Some(s) = sample_compact_set(&g, &mut rng) {
                    sets.push(s);
                }
            }
            if sets.len() < want {
                return Err(xpand_core::Error::Sampling(format!(
                    "found {} of {want} compact sets in {attempts} attempts",
                    sets.len()
                ))
                .into());
            }
            (sets, format!("sampled, seed {}", a.seed))
        }
    };
    let checks: Vec<bool> = sets
        .par_iter()
        .map(|u| verify_mesh_span_certificate(&dims, u))
        .collect::<xpand_core::Result<_>>()?;
    let failed: Vec<&NodeSet> = sets
        .iter()
        .zip(&checks)
        .filter(|(_, ok)| !**ok)
        .map(|(s, _)| s)
        .collect();
    let mut text = format!("mesh {}\nchecked {} compact sets ({how})\n", a.dims, sets.len());
    for s in &failed {
        text.push_str(&format!("certificate failed for {:?}\n", s.as_slice()));
    }
    if failed.is_empty() {
        text.push_str("all compact sets verified\n");
    }
    let n = failed.len();
    Ok(Outcome::new(text.into_bytes(), vec![]).fail_unless(n == 0, || format!("{n} certificates failed")))
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) => write_bytes(p, bytes),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn output_digests(output: Option<&Path>, out: &Outcome) -> Vec<FileDigest> {
    let primary = output.map_or_else(|| "-".to_string(), |p| p.display().to_string());
    let mut digests = vec![FileDigest::of_bytes(primary, &out.bytes)];
    digests.extend(
        out.extras
            .iter()
            .map(|(p, b)| FileDigest::of_bytes(p.display().to_string(), b)),
    );
    digests
}

fn run(cli: Cli, mut cmd: Command, argv: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let output = cli.output.as_deref();
    cmd.resolve(output);
    let out = execute(&cmd)?;
    emit(output, &out.bytes)?;
    for (path, bytes) in &out.extras {
        write_bytes(path, bytes)?;
    }
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        subcommand: cmd.name().into(),
        argv,
        cwd: std::env::current_dir().map_err(|e| Error::io(".", e))?,
        params: serde_json::to_value(&cmd)?,
        seeds: cmd.seeds(),
        threads: cli.threads,
        inputs: out
            .inputs
            .iter()
            .map(|p| FileDigest::of_file(p))
            .collect::<Result<_>>()?,
        outputs: output_digests(output, &out),
        wall_ms: start.elapsed().as_millis() as u64,
    };
    let bytes = manifest.to_bytes()?;
    match (&cli.manifest, output) {
        (Some(p), _) => write_bytes(p, &bytes)?,
        (None, Some(o)) => {
            let mut p = o.as_os_str().to_owned();
            p.push(".manifest.json");
            write_bytes(Path::new(&p), &bytes)?;
        }
        (None, None) => {
            let _ = std::io::stderr().write_all(&bytes);
        }
    }
    match out.failure {
        Some(msg) => Err(Error::CheckFailed(msg)),
        None => Ok(()),
    }
}

/// Re-runs a manifest from its recorded working directory. The primary
/// output goes to `-o` when given; side files are compared but not rewritten.
fn replay(path: &Path, output: Option<&Path>) -> Result<()> {
    let abs = |p: &Path| std::path::absolute(p).map_err(|e| Error::io(p, e));
    let manifest = RunManifest::read(path)?;
    let output = output.map(abs).transpose()?;
    std::env::set_current_dir(&manifest.cwd).map_err(|e| Error::io(&manifest.cwd, e))?;
    let cmd: Command = serde_json::from_value(manifest.params.clone())?;
    manifest.check_inputs()?;
    let out = execute(&cmd)?;
    manifest.check_outputs(&output_digests(output.as_deref(), &out))?;
    if let Some(o) = &output {
        write_bytes(o, &out.bytes)?;
    }
    eprintln!(
        "replay of {}: {} outputs identical",
        path.display(),
        manifest.outputs.len()
    );
    match out.failure {
        Some(msg) => Err(Error::CheckFailed(msg)),
        None => Ok(()),
    }
}

/// Parses `argv` and runs it; returns the process exit code.
pub fn main_with(argv: Vec<OsString>) -> i32 {
    let recorded: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let result = match (cli.replay.clone(), cli.command.clone()) {
        (Some(m), None) => replay(&m, cli.output.as_deref()),
        (None, Some(cmd)) => run(cli, cmd, recorded),
        _ => {
            eprintln!("error: give exactly one of a subcommand or --replay MANIFEST\n\nRun `xpand --help` for usage.");
            return 2;
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
