//! Randomised property suites over small graphs, runnable from the command
//! line so their results can be recorded and replayed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xpand_core::expansion::{edge_expansion_exact, node_expansion_exact, Search};
use xpand_core::faults::{apply_faults, FaultPattern};
use xpand_core::graph::{is_compact, Cut};
use xpand_core::pruning::{compactify, prune, prune2, union_boundary_check};
use xpand_core::{Graph, NodeSet, Rational};

use crate::experiments::trial_seed;
use crate::{Error, Result};

const EPS_CHOICES: [(i64, i64); 5] = [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4)];

/// Connected `G(n, q)` sample with `n` in `min_n..=max_n` and `q` drawn per
/// attempt; resamples until connected.
pub fn random_connected_graph<R: Rng>(rng: &mut R, min_n: usize, max_n: usize) -> Graph {
    loop {
        let n = rng.gen_range(min_n..=max_n);
        let q = rng.gen_range(0.15..0.6);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(q) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).expect("edges are in range");
        if g.is_connected() {
            return g;
        }
    }
}

/// Connected set grown from a random node by random frontier additions.
pub fn random_connected_set<R: Rng>(rng: &mut R, g: &Graph, size: usize) -> NodeSet {
    let start = rng.gen_range(0..g.n());
    let mut set = vec![start];
    let mut frontier: Vec<usize> = g.neighbors(start).to_vec();
    while set.len() < size && !frontier.is_empty() {
        let v = frontier.swap_remove(rng.gen_range(0..frontier.len()));
        if set.contains(&v) {
            continue;
        }
        set.push(v);
        frontier.extend(g.neighbors(v).iter().filter(|w| !set.contains(w)));
    }
    NodeSet::from(set)
}

fn check_suite_args(instances: usize, min_n: usize, max_n: usize) -> Result<()> {
    if instances == 0 {
        return Err(Error::format("instances must be at least 1"));
    }
    if max_n < min_n || max_n > 24 {
        return Err(Error::format(format!("max nodes must be in {min_n}..=24")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopExitReport {
    pub instances: usize,
    pub seed: u64,
    /// Prune runs whose survivor (2+ nodes) has node expansion <= alpha * eps.
    pub node_failures: usize,
    /// Prune2 runs whose survivor (2+ nodes) has edge expansion <= alpha_e * eps.
    pub edge_failures: usize,
    pub invariant_failures: usize,
    /// Prune traces failing the union boundary check.
    pub union_failures: usize,
    /// Instances whose survivor had at least two nodes in both runs.
    pub nontrivial: usize,
    pub culled_steps: usize,
}

impl LoopExitReport {
    pub fn ok(&self) -> bool {
        self.node_failures + self.edge_failures + self.invariant_failures + self.union_failures == 0
    }
}

struct LoopOutcome {
    node_ok: bool,
    edge_ok: bool,
    invariants_ok: bool,
    union_ok: bool,
    nontrivial: bool,
    steps: usize,
}

fn loop_instance(seed: u64, max_n: usize) -> Result<LoopOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_connected_graph(&mut rng, 2, max_n);
    let n = g.n();
    let fault_p = rng.gen_range(0.0..0.35);
    let failed: NodeSet = (0..n).filter(|_| rng.gen_bool(fault_p)).collect();
    let (a, b) = EPS_CHOICES[rng.gen_range(0..EPS_CHOICES.len())];
    let eps = Rational::new(a, b);
    let g_f = apply_faults(&g, &FaultPattern::nodes(n, failed))?;
    let alpha = node_expansion_exact(&g)?.value;
    let alpha_e = edge_expansion_exact(&g)?.value;

    let t = prune(&g_f, alpha, eps, &Search::exact())?;
    let h = g.induced(&t.survivor)?;
    let node_ok = h.n() < 2 || node_expansion_exact(&h)?.value > alpha * eps;
    let union_ok = union_boundary_check(&t, &g_f)?;

    let t2 = prune2(&g_f, alpha_e, eps, &Search::exact())?;
    let h2 = g.induced(&t2.survivor)?;
    let edge_ok = h2.n() < 2 || edge_expansion_exact(&h2)?.value > alpha_e * eps;

    Ok(LoopOutcome {
        node_ok,
        edge_ok,
        invariants_ok: t.check_invariants().is_ok() && t2.check_invariants().is_ok(),
        union_ok,
        nontrivial: h.n() >= 2 && h2.n() >= 2,
        steps: t.steps.len() + t2.steps.len(),
    })
}

/// Random connected graphs of up to `max_n` nodes, random node faults and a
/// random `eps`; runs exact prune and prune2 with the fault-free expansion
/// as threshold and checks both exit conditions.
pub fn loop_exit_suite(instances: usize, seed: u64, max_n: usize) -> Result<LoopExitReport> {
    check_suite_args(instances, 2, max_n)?;
    let runs: Vec<LoopOutcome> = (0..instances)
        .into_par_iter()
        .map(|i| loop_instance(trial_seed(seed, 0, i), max_n))
        .collect::<Result<_>>()?;
    let failures = |f: fn(&LoopOutcome) -> bool| runs.iter().filter(|r| !f(r)).count();
    Ok(LoopExitReport {
        instances,
        seed,
        node_failures: failures(|r| r.node_ok),
        edge_failures: failures(|r| r.edge_ok),
        invariant_failures: failures(|r| r.invariants_ok),
        union_failures: failures(|r| r.union_ok),
        nontrivial: runs.iter().filter(|r| r.nontrivial).count(),
        culled_steps: runs.iter().map(|r| r.steps).sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactReport {
    pub instances: usize,
    pub seed: u64,
    pub not_compact: usize,
    /// Results whose edge ratio exceeds that of the input set.
    pub worse_ratio: usize,
    /// Instances where the input set was already compact.
    pub already_compact: usize,
}

impl CompactReport {
    pub fn ok(&self) -> bool {
        self.not_compact + self.worse_ratio == 0
    }
}

fn compact_instance(seed: u64, max_n: usize) -> Result<(bool, bool, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_connected_graph(&mut rng, 3, max_n);
    let size = rng.gen_range(1..=(g.n() - 1) / 2);
    let s = random_connected_set(&mut rng, &g, size);
    let k = compactify(&g, &s)?;
    let better = Cut::new(&g, k.clone())?.edge_ratio <= Cut::new(&g, s.clone())?.edge_ratio;
    Ok((is_compact(&g, &k)?, better, is_compact(&g, &s)?))
}

/// Random connected graphs and random connected sets below half the nodes;
/// checks that compactify returns a compact set with no larger edge ratio.
pub fn compact_suite(instances: usize, seed: u64, max_n: usize) -> Result<CompactReport> {
    check_suite_args(instances, 3, max_n)?;
    let runs: Vec<(bool, bool, bool)> = (0..instances)
        .into_par_iter()
        .map(|i| compact_instance(trial_seed(seed, 0, i), max_n))
        .collect::<Result<_>>()?;
    Ok(CompactReport {
        instances,
        seed,
        not_compact: runs.iter().filter(|r| !r.0).count(),
        worse_ratio: runs.iter().filter(|r| !r.1).count(),
        already_compact: runs.iter().filter(|r| r.2).count(),
    })
}
