//! Pruning loops that cut sparse pieces off a faulty graph, the
//! compactification step used by the edge variant, and the shattering
//! process used for the adversarial lower bound.
//!
//! All sets in traces are reported in root-graph ids (graph labels).

use alloc::vec::Vec;

use crate::expansion::{find_sparse_edge_cut, find_sparse_node_cut, node_expansion_exact_with, Search};
use crate::graph::{
    connected_components, induces_connected, is_compact, node_boundary, remove_nodes, Cut, Graph, NodeSet,
};
use crate::rational::{le_scaled, ratio, Rational};
use crate::{Error, Limits, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Culls node-sparse sets.
    Prune,
    /// Culls compactified edge-sparse sets.
    Prune2,
}

/// The set actually removed by a `Prune2` step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactStep {
    pub set: NodeSet,
    /// Edge boundary in the current graph.
    pub boundary: usize,
    /// Edge ratio in the current graph.
    pub ratio: Rational,
    pub compact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneStep {
    /// Size of the graph this step ran on.
    pub graph_size: usize,
    /// Whether that graph was connected.
    pub graph_connected: bool,
    /// The sparse set `S_i`.
    pub set: NodeSet,
    /// `|Γ(S_i)|` for `Prune`, `|(S_i, G_i - S_i)|` for `Prune2`.
    pub boundary: usize,
    /// `boundary / |S_i|`.
    pub ratio: Rational,
    /// `K_i` for `Prune2`.
    pub compact: Option<CompactStep>,
}

impl PruneStep {
    /// Nodes removed by this step.
    pub fn culled(&self) -> &NodeSet {
        self.compact.as_ref().map_or(&self.set, |c| &c.set)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneTrace {
    pub algorithm: Algorithm,
    /// Expansion of the fault-free graph supplied by the caller.
    pub threshold: Rational,
    pub eps: Rational,
    /// Node count of the root graph.
    pub universe: usize,
    /// Root ids absent from the faulty graph.
    pub faults: NodeSet,
    pub steps: Vec<PruneStep>,
    pub survivor: NodeSet,
    /// True when every cut search was exact.
    pub certified: bool,
}

impl PruneTrace {
    /// Checks the structural invariants of the trace: culled sets, survivor
    /// and faults partition the root ids, sizes are consistent and every
    /// step satisfied the loop condition.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::input(alloc::format!("invalid trace: {msg}")));
        let mut seen = self.faults.membership(self.universe);
        let mark = |set: &NodeSet, seen: &mut Vec<bool>| -> bool {
            for v in set.iter() {
                if v >= seen.len() || seen[v] {
                    return false;
                }
                seen[v] = true;
            }
            true
        };
        let mut size = self.universe - self.faults.len();
        for step in &self.steps {
            if step.graph_size != size {
                return fail("graph size does not match previous steps");
            }
            let s = step.set.len();
            if s == 0 || 2 * s > size {
                return fail("culled set has the wrong size");
            }
            if step.ratio != ratio(step.boundary, s) {
                return fail("recorded ratio does not match the boundary");
            }
            if !le_scaled(step.boundary, self.threshold, self.eps, s) {
                return fail("step does not satisfy the loop condition");
            }
            match (&step.compact, self.algorithm) {
                (None, Algorithm::Prune) => {}
                (Some(k), Algorithm::Prune2) => {
                    if k.set.is_empty() || k.set.len() >= size {
                        return fail("compact set has the wrong size");
                    }
                    if step.graph_connected && !k.compact {
                        return fail("culled set is not compact");
                    }
                    if !step.graph_connected && k.set != step.set {
                        return fail("disconnected graph must cull the sparse component itself");
                    }
                    if k.ratio > step.ratio {
                        return fail("compactification increased the edge ratio");
                    }
                }
                _ => return fail("step kind does not match the algorithm"),
            }
            if !mark(step.culled(), &mut seen) {
                return fail("culled sets overlap");
            }
            size -= step.culled().len();
        }
        if self.survivor.len() != size {
            return fail("survivor size does not match");
        }
        if !mark(&self.survivor, &mut seen) || seen.iter().any(|&x| !x) {
            return fail("culled sets, survivor and faults do not partition the nodes");
        }
        Ok(())
    }

    pub fn culled_total(&self) -> usize {
        self.steps.iter().map(|s| s.culled().len()).sum()
    }
}

fn check_eps(threshold: Rational, eps: Rational) -> Result<()> {
    let zero = Rational::from_integer(0);
    if threshold <= zero {
        return Err(Error::input("expansion threshold must be positive"));
    }
    if eps <= zero || eps >= Rational::from_integer(1) {
        return Err(Error::input("eps must lie in (0, 1)"));
    }
    Ok(())
}

fn missing_labels(g: &Graph) -> NodeSet {
    let present = NodeSet::from(g.labels().to_vec());
    present.complement(g.universe())
}

/// Repeatedly removes a set `S` with `|S| <= |G_i|/2` and
/// `|Γ(S)| <= alpha * eps * |S|` until none is left.
///
/// `alpha` is the node expansion of the fault-free graph. With an exact
/// search the survivor has node expansion above `alpha * eps`.
pub fn prune(g_f: &Graph, alpha: Rational, eps: Rational, search: &Search) -> Result<PruneTrace> {
    check_eps(alpha, eps)?;
    let mut g = g_f.clone();
    let mut steps = Vec::new();
    while let Some(cut) = find_sparse_node_cut(&g, alpha, eps, search)? {
        steps.push(PruneStep {
            graph_size: g.n(),
            graph_connected: g.is_connected(),
            set: g.to_labels(&cut.set),
            boundary: cut.node_boundary.len(),
            ratio: cut.node_ratio,
            compact: None,
        });
        g = remove_nodes(&g, &cut.set)?;
    }
    Ok(PruneTrace {
        algorithm: Algorithm::Prune,
        threshold: alpha,
        eps,
        universe: g_f.universe(),
        faults: missing_labels(g_f),
        steps,
        survivor: NodeSet::from(g.labels().to_vec()),
        certified: search.is_exact(),
    })
}

/// Edge variant of [`prune`]: each sparse connected set is replaced by its
/// compactification before removal. When the current graph is disconnected
/// the sparse set is a whole component and is removed as is.
pub fn prune2(g_f: &Graph, alpha_e: Rational, eps: Rational, search: &Search) -> Result<PruneTrace> {
    check_eps(alpha_e, eps)?;
    let mut g = g_f.clone();
    let mut steps = Vec::new();
    while let Some(cut) = find_sparse_edge_cut(&g, alpha_e, eps, search)? {
        let connected = g.is_connected();
        let k = if connected {
            compact_set(&g, &cut.set)?
        } else {
            cut.set.clone()
        };
        let compact = is_compact(&g, &k)?;
        let kcut = Cut::new(&g, k)?;
        steps.push(PruneStep {
            graph_size: g.n(),
            graph_connected: connected,
            set: g.to_labels(&cut.set),
            boundary: cut.edge_boundary_size,
            ratio: ratio(cut.edge_boundary_size, cut.set.len()),
            compact: Some(CompactStep {
                set: g.to_labels(&kcut.set),
                boundary: kcut.edge_boundary_size,
                ratio: kcut.edge_ratio,
                compact,
            }),
        });
        g = remove_nodes(&g, &kcut.set)?;
    }
    Ok(PruneTrace {
        algorithm: Algorithm::Prune2,
        threshold: alpha_e,
        eps,
        universe: g_f.universe(),
        faults: missing_labels(g_f),
        steps,
        survivor: NodeSet::from(g.labels().to_vec()),
        certified: search.is_exact(),
    })
}

/// A compact set whose edge ratio is at most that of `s`.
///
/// Requires a connected graph and a connected `s` with `|s| < n/2`.
/// If the complement of `s` is connected, `s` is returned. Otherwise, if a
/// component `C` of `G - s` has at least `n/2` nodes the result is `G - C`;
/// failing that, the component with the smallest edge ratio (lowest id on
/// ties) is returned.
pub fn compactify(g: &Graph, s: &NodeSet) -> Result<NodeSet> {
    s.validate(g.n())?;
    if !g.is_connected() {
        return Err(Error::input("compactify needs a connected graph"));
    }
    if !induces_connected(g, s)? {
        return Err(Error::input("set must induce a connected subgraph"));
    }
    if 2 * s.len() >= g.n() {
        return Err(Error::input("set must contain fewer than half of the nodes"));
    }
    compact_set(g, s)
}

/// [`compactify`] without argument checks; also valid for `|s| = n/2`.
fn compact_set(g: &Graph, s: &NodeSet) -> Result<NodeSet> {
    let n = g.n();
    let rest = s.complement(n);
    let sub = g.induced(&rest)?;
    let mut comps: Vec<NodeSet> = connected_components(&sub)
        .into_iter()
        .map(|c| rest_ids(&rest, &c))
        .collect();
    if comps.len() <= 1 {
        return Ok(s.clone());
    }
    if let Some(big) = comps.iter().find(|c| 2 * c.len() >= n) {
        return Ok(big.complement(n));
    }
    comps.sort_by_key(|c| c.first());
    let mut best: Option<(usize, NodeSet)> = None;
    for c in comps {
        let e = Cut::new(g, c.clone())?.edge_boundary_size;
        let better = match &best {
            None => true,
            Some((be, bc)) => e * bc.len() < *be * c.len(),
        };
        if better {
            best = Some((e, c));
        }
    }
    Ok(best.expect("at least two components").1)
}

/// Maps ids of `g.induced(rest)` back to ids of `g`.
fn rest_ids(rest: &NodeSet, local: &NodeSet) -> NodeSet {
    let ids = rest.as_slice();
    local.iter().map(|v| ids[v]).collect()
}

/// Checks that the boundaries of the culled sets add up: for every prefix
/// `S_1..S_j` of a `Prune` trace, `|Γ(∪S_i)| <= Σ|Γ_{G_i}(S_i)|` and
/// `Σ|Γ_{G_i}(S_i)| <= alpha * eps * |∪S_i|`, with the step boundaries
/// recomputed by replaying the trace on `g_f`.
pub fn union_boundary_check(trace: &PruneTrace, g_f: &Graph) -> Result<bool> {
    if trace.algorithm != Algorithm::Prune {
        return Err(Error::input("union boundary check applies to prune traces"));
    }
    if trace.universe != g_f.universe() || trace.faults != missing_labels(g_f) {
        return Err(Error::input("trace was not produced on this graph"));
    }
    let mut g = g_f.clone();
    let mut union = NodeSet::new();
    let mut sum = 0usize;
    for step in &trace.steps {
        let local = g.from_labels(&step.set)?;
        let boundary = node_boundary(&g, &local)?.len();
        if boundary != step.boundary {
            return Ok(false);
        }
        sum += boundary;
        union = union.union(&g_f.from_labels(&step.set)?);
        let total = node_boundary(g_f, &union)?.len();
        if total > sum || !le_scaled(sum, trace.threshold, trace.eps, union.len()) {
            return Ok(false);
        }
        g = remove_nodes(&g, &local)?;
    }
    Ok(NodeSet::from(g.labels().to_vec()) == trace.survivor)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShatterStep {
    /// The piece that was split.
    pub piece: NodeSet,
    /// Minimum-expansion set of the piece.
    pub set: NodeSet,
    /// Its boundary inside the piece, removed from the graph.
    pub removed: NodeSet,
    pub ratio: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShatterOutcome {
    pub removed_total: usize,
    pub removed: NodeSet,
    /// Final pieces, largest first.
    pub pieces: Vec<NodeSet>,
    /// Connected components of the graph after removal, largest first.
    pub components: Vec<NodeSet>,
    pub steps: Vec<ShatterStep>,
}

/// Splits the graph until every piece has fewer than `eps_frac * n` nodes.
///
/// Pieces start as the connected components. Each step takes the largest
/// piece `P` (lowest id on ties) with `|P| >= eps_frac * n` and `|P| >= 2`,
/// finds its exact minimum node-expansion set `U` in `G[P]`, removes
/// `Γ(U)` and replaces `P` by `U` and `P - U - Γ(U)`.
pub fn shatter_uniform(g: &Graph, eps_frac: Rational, limits: &Limits) -> Result<ShatterOutcome> {
    let zero = Rational::from_integer(0);
    if eps_frac <= zero || eps_frac >= Rational::from_integer(1) {
        return Err(Error::input("eps_frac must lie in (0, 1)"));
    }
    let n = g.n();
    let (num, den) = (*eps_frac.numer() as u128, *eps_frac.denom() as u128);
    let large = |p: &NodeSet| p.len() >= 2 && p.len() as u128 * den >= num * n as u128;

    let mut pieces = connected_components(g);
    let mut removed = NodeSet::new();
    let mut steps = Vec::new();
    loop {
        let pick = pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| large(p))
            .min_by(|(_, a), (_, b)| b.len().cmp(&a.len()).then(a.first().cmp(&b.first())))
            .map(|(i, _)| i);
        let Some(i) = pick else { break };
        let piece = pieces.swap_remove(i);
        let sub = g.induced(&piece)?;
        let best = node_expansion_exact_with(&sub, limits)?;
        let u = rest_ids(&piece, &best.witness.set);
        let gamma = rest_ids(&piece, &best.witness.node_boundary);
        let other = piece.difference(&u).difference(&gamma);
        removed = removed.union(&gamma);
        steps.push(ShatterStep {
            piece,
            set: u.clone(),
            removed: gamma,
            ratio: best.value,
        });
        pieces.push(u);
        if !other.is_empty() {
            pieces.push(other);
        }
    }
    pieces.sort_by(|a, b| b.len().cmp(&a.len()).then(a.first().cmp(&b.first())));
    let components: Vec<NodeSet> = connected_components(&remove_nodes(g, &removed)?)
        .into_iter()
        .map(|c| rest_ids(&removed.complement(n), &c))
        .collect();
    let label = |s: NodeSet| g.to_labels(&s);
    Ok(ShatterOutcome {
        removed_total: removed.len(),
        removed: label(removed),
        pieces: pieces.into_iter().map(label).collect(),
        components: components.into_iter().map(label).collect::<Vec<_>>(),
        steps: steps
            .into_iter()
            .map(|s| ShatterStep {
                piece: label(s.piece),
                set: label(s.set),
                removed: label(s.removed),
                ratio: s.ratio,
            })
            .collect(),
    })
}
