//! Fault patterns: random node faults, random edge survival, the two
//! adversarial strategies, and their application to a graph.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64`; nodes (and
//! edges, in sorted order) each consume one Bernoulli draw in ascending id
//! order, so patterns are reproducible across platforms.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expansion::{node_expansion_exact_with, node_expansion_heuristic};
use crate::generators::SubdividedGraph;
use crate::graph::{connected_components, remove_nodes, Graph, NodeSet};
use crate::{Error, Limits, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FaultKind {
    /// Failed node ids.
    Nodes(NodeSet),
    /// Surviving edges `(u, v)`, `u < v`, sorted.
    EdgeSurvival(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Random {
        p: f64,
        seed: u64,
    },
    Strategy {
        name: String,
        params: Vec<(String, String)>,
    },
    Manual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultPattern {
    pub kind: FaultKind,
    /// Node count of the graph the pattern is for.
    pub host_nodes: usize,
    pub provenance: Provenance,
}

impl FaultPattern {
    /// Node faults without provenance.
    pub fn nodes(host_nodes: usize, failed: NodeSet) -> FaultPattern {
        FaultPattern {
            kind: FaultKind::Nodes(failed),
            host_nodes,
            provenance: Provenance::Manual,
        }
    }

    /// Failed nodes, or `None` for edge-survival patterns.
    pub fn failed(&self) -> Option<&NodeSet> {
        match &self.kind {
            FaultKind::Nodes(s) => Some(s),
            FaultKind::EdgeSurvival(_) => None,
        }
    }

    /// Checks the pattern against its host graph.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.host_nodes != g.n() {
            return Err(Error::input(format!(
                "fault pattern is for a graph with {} nodes, got {}",
                self.host_nodes,
                g.n()
            )));
        }
        match &self.kind {
            FaultKind::Nodes(s) => s.validate(g.n()),
            FaultKind::EdgeSurvival(edges) => {
                if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= v || !g.has_edge(u, v)) {
                    return Err(Error::input(format!("({u}, {v}) is not an edge of the host graph")));
                }
                if edges.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::input("surviving edges must be sorted and distinct"));
                }
                Ok(())
            }
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Each node fails independently with probability `p`.
pub fn random_node_faults(g: &Graph, p: f64, seed: u64) -> Result<FaultPattern> {
    check_probability(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let failed: NodeSet = (0..g.n()).filter(|_| rng.gen_bool(p)).collect();
    Ok(FaultPattern {
        kind: FaultKind::Nodes(failed),
        host_nodes: g.n(),
        provenance: Provenance::Random { p, seed },
    })
}

/// Each edge survives independently with probability `p`, as a pattern.
pub fn random_edge_survival_pattern(g: &Graph, p: f64, seed: u64) -> Result<FaultPattern> {
    check_probability(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kept: Vec<_> = g.edges().filter(|_| rng.gen_bool(p)).collect();
    Ok(FaultPattern {
        kind: FaultKind::EdgeSurvival(kept),
        host_nodes: g.n(),
        provenance: Provenance::Random { p, seed },
    })
}

/// Subgraph on all nodes keeping each edge with probability `p`.
pub fn random_edge_survival(g: &Graph, p: f64, seed: u64) -> Result<Graph> {
    apply_faults(g, &random_edge_survival_pattern(g, p, seed)?)
}

/// Fails the middle node of every chain: position `k/2` counted from the
/// smaller base endpoint. Requires even `k`.
pub fn attack_chain_centers(h: &SubdividedGraph) -> Result<FaultPattern> {
    if !h.k.is_multiple_of(2) {
        return Err(Error::input("chain-centre attack needs an even chain length"));
    }
    let failed: NodeSet = h.chains.iter().map(|c| c.nodes[h.k / 2 - 1]).collect();
    Ok(FaultPattern {
        kind: FaultKind::Nodes(failed),
        host_nodes: h.graph.n(),
        provenance: Provenance::Strategy {
            name: "chain-centers".into(),
            params: vec![("k".into(), h.k.to_string())],
        },
    })
}

/// Repeatedly fails the boundary of a minimum node-expansion set of the
/// largest remaining component (ascending ids, truncated to the budget).
/// The search is exact within `limits` and heuristic beyond.
pub fn attack_greedy_cuts(g: &Graph, budget: usize, limits: &Limits) -> Result<FaultPattern> {
    let n = g.n();
    let mut cur = Graph::from_edges(n, &g.edges().collect::<Vec<_>>())?;
    let mut failed = NodeSet::new();
    let mut exact = true;
    while failed.len() < budget {
        let Some(largest) = connected_components(&cur).into_iter().next() else {
            break;
        };
        if largest.len() < 2 {
            break;
        }
        let sub = cur.induced(&largest)?;
        let best = match node_expansion_exact_with(&sub, limits) {
            Ok(r) => r,
            Err(e) if e.is_refusal() => {
                exact = false;
                node_expansion_heuristic(&sub, 4 * sub.n().min(256), 0)?
            }
            Err(e) => return Err(e),
        };
        let gamma = sub.to_labels(&best.witness.node_boundary);
        if gamma.is_empty() {
            break;
        }
        let take: NodeSet = gamma.iter().take(budget - failed.len()).collect();
        cur = remove_nodes(&cur, &cur.from_labels(&take)?)?;
        failed = failed.union(&take);
    }
    Ok(FaultPattern {
        kind: FaultKind::Nodes(failed),
        host_nodes: n,
        provenance: Provenance::Strategy {
            name: "greedy-cuts".into(),
            params: vec![
                ("budget".into(), budget.to_string()),
                ("exact".into(), exact.to_string()),
            ],
        },
    })
}

/// The faulty graph: failed nodes removed, or only surviving edges kept.
pub fn apply_faults(g: &Graph, pattern: &FaultPattern) -> Result<Graph> {
    pattern.validate(g)?;
    match &pattern.kind {
        FaultKind::Nodes(s) => remove_nodes(g, s),
        FaultKind::EdgeSurvival(kept) => Ok(g.edge_subgraph(|u, v| kept.binary_search(&(u, v)).is_ok())),
    }
}
