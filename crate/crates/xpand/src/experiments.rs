//! Seeded Monte-Carlo runs and exhaustive checks.
//!
//! Trial `t` at grid point `i` uses seed `seed_base + i * 1_000_000 + t`.
//! Trials run on the rayon pool; results are always ordered by
//! `(point, trial)`, so output does not depend on the thread count.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xpand_core::expansion::{
    edge_expansion_exact_with, edge_expansion_heuristic, node_expansion_exact_with, node_expansion_heuristic, Mode,
    Search,
};
use xpand_core::faults::{apply_faults, random_edge_survival_pattern, random_node_faults, FaultPattern};
use xpand_core::generators::SubdividedGraph;
use xpand_core::graph::{connected_components, for_each_connected_set};
use xpand_core::pruning::{prune, prune2, union_boundary_check};
use xpand_core::{Graph, Limits, NodeSet, Rational};

use crate::format::RationalJson;
use crate::{Error, Result};

/// Fraction of nodes in the largest component; 0 for the empty graph.
pub fn gamma(g: &Graph) -> f64 {
    largest_component(g) as f64 / g.n().max(1) as f64
}

fn largest_component(g: &Graph) -> usize {
    connected_components(g).first().map_or(0, |c| c.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FaultModel {
    /// Each node fails with probability p.
    Node,
    /// Each edge survives with probability p.
    Edge,
}

pub fn trial_seed(seed_base: u64, point: usize, trial: usize) -> u64 {
    seed_base
        .wrapping_add((point as u64).wrapping_mul(1_000_000))
        .wrapping_add(trial as u64)
}

pub fn draw_faults(g: &Graph, model: FaultModel, p: f64, seed: u64) -> Result<FaultPattern> {
    Ok(match model {
        FaultModel::Node => random_node_faults(g, p, seed)?,
        FaultModel::Edge => random_edge_survival_pattern(g, p, seed)?,
    })
}

/// Pruning applied to each faulty graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneParams {
    /// `Node` runs the node pruning loop, `Edge` the compactifying one.
    pub mode: Mode,
    /// Expansion of the fault-free graph.
    pub threshold: Rational,
    pub eps: Rational,
    pub search: Search,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub model: FaultModel,
    pub p_grid: Vec<f64>,
    pub trials: usize,
    pub seed_base: u64,
    pub prune: Option<PruneParams>,
    /// Record wall time per trial; off by default so output is replayable.
    pub timings: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::format("trials must be at least 1"));
        }
        if self.p_grid.is_empty() {
            return Err(Error::format("probability grid is empty"));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::format(format!("probability {p} outside [0, 1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub p: f64,
    pub trial: usize,
    pub gamma: f64,
    /// Surviving fraction `|H|/n`: the pruned subgraph, or the largest
    /// component when no pruning is requested.
    pub h_frac: f64,
    /// Expansion of `H` in the pruning mode; an upper bound when not
    /// certified. Absent without pruning or when `|H| < 2`.
    pub expansion: Option<RationalJson>,
    pub certified: bool,
    pub ms: u64,
}

/// Parses `a:b:step` (inclusive) or a comma-separated list.
pub fn parse_p_grid(s: &str) -> Result<Vec<f64>> {
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| Error::format(format!("bad probability {x:?}")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step <= 0.0 || b < a {
                return Err(Error::format("grid a:b:step needs a <= b and step > 0"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| a + i as f64 * step).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::format(format!("bad probability grid {s:?}"))),
    };
    Ok(grid)
}

/// One trial: draw faults, measure the largest component, optionally prune.
pub fn run_trial(g: &Graph, spec: &ExperimentSpec, point: usize, trial: usize) -> Result<TrialResult> {
    let start = Instant::now();
    let p = spec.p_grid[point];
    let seed = trial_seed(spec.seed_base, point, trial);
    let g_f = apply_faults(g, &draw_faults(g, spec.model, p, seed)?)?;
    let n = g.n().max(1) as f64;
    let gamma = largest_component(&g_f) as f64 / n;
    let (h_frac, expansion, certified) = match &spec.prune {
        None => (gamma, None, false),
        Some(params) => {
            let trace = match params.mode {
                Mode::Node => prune(&g_f, params.threshold, params.eps, &params.search)?,
                Mode::Edge => prune2(&g_f, params.threshold, params.eps, &params.search)?,
            };
            let h = g.induced(&trace.survivor)?;
            let (value, exact) = survivor_expansion(&h, params.mode, &params.search.limits, seed)?;
            (
                h.n() as f64 / n,
                value.map(RationalJson::from),
                trace.certified && exact,
            )
        }
    };
    Ok(TrialResult {
        p,
        trial,
        gamma,
        h_frac,
        expansion,
        certified,
        ms: if spec.timings {
            start.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// Exact within the sweep limit, otherwise a heuristic upper bound.
fn survivor_expansion(h: &Graph, mode: Mode, limits: &Limits, seed: u64) -> Result<(Option<Rational>, bool)> {
    if h.n() < 2 {
        return Ok((None, true));
    }
    let exact = h.n() <= limits.exact_nodes;
    let r = match (mode, exact) {
        (Mode::Node, true) => node_expansion_exact_with(h, limits)?,
        (Mode::Edge, true) => edge_expansion_exact_with(h, limits)?,
        (Mode::Node, false) => node_expansion_heuristic(h, 32, seed)?,
        (Mode::Edge, false) => edge_expansion_heuristic(h, 32, seed)?,
    };
    Ok((Some(r.value), exact))
}

/// Every `(point, trial)` of the spec, in order.
pub fn run_experiment(g: &Graph, spec: &ExperimentSpec) -> Result<Vec<TrialResult>> {
    spec.validate()?;
    let total = spec.p_grid.len() * spec.trials;
    (0..total)
        .into_par_iter()
        .map(|i| run_trial(g, spec, i / spec.trials, i % spec.trials))
        .collect()
}

/// Largest-component sweep without pruning.
pub fn run_percolation_sweep(
    g: &Graph,
    model: FaultModel,
    p_grid: &[f64],
    trials: usize,
    seed_base: u64,
) -> Result<Vec<TrialResult>> {
    run_experiment(
        g,
        &ExperimentSpec {
            model,
            p_grid: p_grid.to_vec(),
            trials,
            seed_base,
            prune: None,
            timings: false,
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub p: f64,
    pub mean_gamma: f64,
    pub std_gamma: f64,
    pub trials: usize,
}

/// Mean and sample standard deviation of gamma per grid point.
pub fn summarize(results: &[TrialResult]) -> Vec<PointSummary> {
    let mut out: Vec<PointSummary> = Vec::new();
    let mut i = 0;
    while i < results.len() {
        let p = results[i].p;
        let group: Vec<f64> = results[i..].iter().take_while(|r| r.p == p).map(|r| r.gamma).collect();
        i += group.len();
        let k = group.len() as f64;
        let mean = group.iter().sum::<f64>() / k;
        let var = if group.len() > 1 {
            group.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        out.push(PointSummary {
            p,
            mean_gamma: mean,
            std_gamma: var.sqrt(),
            trials: group.len(),
        });
    }
    out
}

pub const CSV_HEADER: [&str; 8] = [
    "p",
    "trial",
    "gamma",
    "h_frac",
    "expansion_num",
    "expansion_den",
    "certified",
    "ms",
];

pub fn results_csv(results: &[TrialResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in results {
        let (num, den) = r.expansion.map_or((String::new(), String::new()), |e| {
            (e.num.to_string(), e.den.to_string())
        });
        w.write_record([
            r.p.to_string(),
            r.trial.to_string(),
            r.gamma.to_string(),
            r.h_frac.to_string(),
            num,
            den,
            r.certified.to_string(),
            r.ms.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::format(format!("csv: {e}")))
}

pub fn results_jsonl(results: &[TrialResult]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for r in results {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn summary_csv(summary: &[PointSummary]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "mean_gamma", "std_gamma", "trials"])?;
    for s in summary {
        w.write_record([
            s.p.to_string(),
            s.mean_gamma.to_string(),
            s.std_gamma.to_string(),
            s.trials.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::format(format!("csv: {e}")))
}

/// Outcome of pruning against every fault set of a given size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryReport {
    /// Exact node expansion of the fault-free graph.
    pub alpha: RationalJson,
    pub k: usize,
    pub f: usize,
    pub eps: RationalJson,
    /// `k * f / alpha <= n / 4`.
    pub admissible: bool,
    /// `n - k * f / alpha`.
    pub size_bound: RationalJson,
    /// `(1 - 1/k) * alpha`.
    pub expansion_bound: RationalJson,
    pub fault_sets: u64,
    pub worst_faults: Vec<usize>,
    pub worst_survivor: usize,
    pub worst_expansion: Option<RationalJson>,
    /// Fault sets where `|H|` fell below `size_bound`.
    pub size_violations: u64,
    /// Fault sets where `H` (with at least 2 nodes) fell below `expansion_bound`.
    pub expansion_violations: u64,
    /// Traces failing the structural invariants.
    pub invariant_failures: u64,
    /// Traces failing the union boundary check.
    pub union_failures: u64,
}

impl AdversaryReport {
    pub fn ok(&self) -> bool {
        self.size_violations == 0
            && self.expansion_violations == 0
            && self.invariant_failures == 0
            && self.union_failures == 0
    }
}

fn combinations(n: usize, f: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..f).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..f).rev().find(|&i| idx[i] != i + n - f) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..f {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

struct Iterate {
    survivor: usize,
    expansion: Option<Rational>,
    size_ok: bool,
    expansion_ok: bool,
    invariants_ok: bool,
    union_ok: bool,
}

/// Runs exact node pruning with `eps = 1 - 1/k` on every fault set of size
/// `f` and checks the size and expansion guarantees on each. The worst case
/// minimises `|H|`, then the expansion of `H`, then the fault set.
pub fn adversary_exhaustive(g: &Graph, f: usize, k: usize, budget: u64, limits: &Limits) -> Result<AdversaryReport> {
    let n = g.n();
    if k < 2 {
        return Err(Error::format("k must be at least 2"));
    }
    if f > n {
        return Err(Error::format("more faults than nodes"));
    }
    let count = binomial(n, f);
    if count > budget {
        return Err(xpand_core::Error::LimitExceeded {
            what: "exhaustive fault sets",
            size: count,
            limit: budget,
        }
        .into());
    }
    let alpha = node_expansion_exact_with(g, limits)?.value;
    if alpha == Rational::from_integer(0) {
        return Err(Error::format("graph is disconnected; its expansion is 0"));
    }
    let kr = Rational::from_integer(k as i64);
    let one = Rational::from_integer(1);
    let eps = one - one / kr;
    let fr = Rational::from_integer(f as i64);
    let size_bound = Rational::from_integer(n as i64) - kr * fr / alpha;
    let expansion_bound = eps * alpha;
    let admissible = kr * fr / alpha <= Rational::new(n as i64, 4);
    let search = Search::exact().with_limits(*limits);

    let sets = combinations(n, f);
    let runs: Vec<Iterate> = sets
        .par_iter()
        .map(|faults| -> Result<Iterate> {
            let g_f = apply_faults(g, &FaultPattern::nodes(n, NodeSet::from(faults.clone())))?;
            let trace = prune(&g_f, alpha, eps, &search)?;
            let h = g.induced(&trace.survivor)?;
            let expansion = if h.n() >= 2 {
                Some(node_expansion_exact_with(&h, limits)?.value)
            } else {
                None
            };
            Ok(Iterate {
                survivor: h.n(),
                size_ok: Rational::from_integer(h.n() as i64) >= size_bound,
                expansion_ok: expansion.is_none_or(|x| x >= expansion_bound),
                expansion,
                invariants_ok: trace.check_invariants().is_ok(),
                union_ok: union_boundary_check(&trace, &g_f)?,
            })
        })
        .collect::<Result<_>>()?;

    let worst = (0..runs.len())
        .min_by(|&a, &b| {
            let key = |r: &Iterate| (r.survivor, r.expansion.unwrap_or(Rational::from_integer(-1)));
            key(&runs[a]).cmp(&key(&runs[b])).then(a.cmp(&b))
        })
        .expect("at least one fault set");
    let tally = |pred: fn(&Iterate) -> bool| runs.iter().filter(|r| !pred(r)).count() as u64;
    Ok(AdversaryReport {
        alpha: alpha.into(),
        k,
        f,
        eps: eps.into(),
        admissible,
        size_bound: size_bound.into(),
        expansion_bound: expansion_bound.into(),
        fault_sets: runs.len() as u64,
        worst_faults: sets[worst].clone(),
        worst_survivor: runs[worst].survivor,
        worst_expansion: runs[worst].expansion.map(Into::into),
        size_violations: tally(|r| r.size_ok),
        expansion_violations: tally(|r| r.expansion_ok),
        invariant_failures: tally(|r| r.invariants_ok),
        union_failures: tally(|r| r.union_ok),
    })
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Largest admissible fault count: the largest `f` with
/// `k * f / alpha <= n / 4`.
pub fn max_admissible_faults(n: usize, alpha: Rational, k: usize) -> usize {
    let limit = Rational::new(n as i64, 4) * alpha / Rational::from_integer(k as i64);
    (limit.floor().to_integer().max(0)) as usize
}

/// One row of the connected-subgraph census.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    /// Number of base vertices in the subgraph.
    pub r: usize,
    /// Connected node sets of the subdivided graph with exactly `r` base
    /// vertices.
    pub raw_count: u64,
    /// Distinct base-vertex sets among them; each is a connected `r`-set of
    /// the base graph, the object bounded by `n * delta^(2r)`.
    pub base_sets: u64,
    pub bound: u128,
    /// `base_sets <= bound`.
    pub ok: bool,
    pub raw_within_bound: bool,
}

/// Enumerates every connected node set of `h` and bins it by the number of
/// base vertices it contains, for `1 <= r <= r_max`.
pub fn verify_subgraph_count_bound(h: &SubdividedGraph, r_max: usize, cap: u64) -> Result<Vec<CensusRow>> {
    let n = h.base_nodes.len();
    let delta = h.base_max_degree() as u128;
    let base_mask = h.base_nodes.to_mask();
    let mut raw = vec![0u64; r_max + 1];
    let mut skeletons: Vec<BTreeSet<u64>> = vec![BTreeSet::new(); r_max + 1];
    for_each_connected_set(&h.graph, h.graph.n(), cap, |m| {
        let b = m & base_mask;
        let r = b.count_ones() as usize;
        if (1..=r_max).contains(&r) {
            raw[r] += 1;
            skeletons[r].insert(b);
        }
    })?;
    Ok((1..=r_max)
        .map(|r| {
            let bound = (n as u128).saturating_mul(delta.saturating_pow(2 * r as u32));
            let base_sets = skeletons[r].len() as u64;
            CensusRow {
                r,
                raw_count: raw[r],
                base_sets,
                bound,
                ok: base_sets as u128 <= bound,
                raw_within_bound: raw[r] as u128 <= bound,
            }
        })
        .collect())
}

/// Exact expansion of the fault-free graph in `mode`, used as the pruning
/// threshold by `--oracle`.
pub fn oracle_alpha(g: &Graph, mode: Mode, limits: &Limits) -> Result<Rational> {
    Ok(match mode {
        Mode::Node => node_expansion_exact_with(g, limits)?.value,
        Mode::Edge => edge_expansion_exact_with(g, limits)?.value,
    })
}
