//! The span of a graph: over all compact sets `U`, the largest ratio between
//! the node count of a minimum Steiner tree on `Γ(U)` and `|Γ(U)|`.
//!
//! Tree size is measured in nodes, so every span is at least 1. Also
//! contains the explicit Steiner-tree certificate for meshes, built from
//! virtual edges between boundary nodes that differ by at most one in at
//! most two coordinates.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{self, full};
use crate::generators::MeshShape;
use crate::graph::{induces_connected, is_compact, node_boundary, Graph, NodeSet};
use crate::rational::{ratio, Rational};
use crate::{Error, Limits, Result};

/// A minimum-node Steiner tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteinerTree {
    /// Tree edges `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub node_count: usize,
}

impl SteinerTree {
    pub fn nodes(&self) -> NodeSet {
        let mut v: Vec<usize> = self.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        v.sort_unstable();
        v.dedup();
        NodeSet::from(v)
    }
}

pub fn steiner_tree_min(g: &Graph, terminals: &NodeSet) -> Result<SteinerTree> {
    steiner_tree_min_with(g, terminals, &Limits::default())
}

#[derive(Clone, Copy)]
enum Choice {
    Unset,
    Leaf,
    Split(u32),
    Edge(u32),
}

/// Smallest tree (by node count) containing every terminal, found by the
/// Dreyfus-Wagner dynamic program over terminal subsets with unit edge
/// weights. Among optimal trees the one reached first by the program is
/// returned, which is deterministic.
pub fn steiner_tree_min_with(g: &Graph, terminals: &NodeSet, limits: &Limits) -> Result<SteinerTree> {
    terminals.validate(g.n())?;
    let t = terminals.len();
    if t == 0 {
        return Err(Error::input("terminal set is empty"));
    }
    if t > limits.steiner_terminals {
        return Err(Error::LimitExceeded {
            what: "Steiner tree terminals",
            size: t as u64,
            limit: limits.steiner_terminals as u64,
        });
    }
    let term = terminals.as_slice();
    if t == 1 {
        return Ok(SteinerTree {
            edges: Vec::new(),
            node_count: 1,
        });
    }
    let n = g.n();
    let masks = 1usize << t;
    const INF: u32 = u32::MAX / 2;
    let mut dp = vec![INF; masks * n];
    let mut how = vec![Choice::Unset; masks * n];
    for (i, &v) in term.iter().enumerate() {
        dp[(1 << i) * n + v] = 0;
        how[(1 << i) * n + v] = Choice::Leaf;
    }
    let mut heap = BinaryHeap::new();
    for mask in 1..masks {
        let row = mask * n;
        if mask & (mask - 1) != 0 {
            let low = mask & mask.wrapping_neg();
            // Submasks containing the lowest bit; each split counted once.
            let mut sub = (mask - 1) & mask;
            while sub > 0 {
                if sub & low != 0 {
                    let (a, b) = (sub * n, (mask ^ sub) * n);
                    for v in 0..n {
                        let c = dp[a + v] + dp[b + v];
                        if c < dp[row + v] {
                            dp[row + v] = c;
                            how[row + v] = Choice::Split(sub as u32);
                        }
                    }
                }
                sub = (sub - 1) & mask;
            }
        }
        heap.clear();
        for v in 0..n {
            if dp[row + v] < INF {
                heap.push(Reverse((dp[row + v], v)));
            }
        }
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dp[row + v] {
                continue;
            }
            for &w in g.neighbors(v) {
                if d + 1 < dp[row + w] {
                    dp[row + w] = d + 1;
                    how[row + w] = Choice::Edge(v as u32);
                    heap.push(Reverse((d + 1, w)));
                }
            }
        }
    }
    let root = term[0];
    if dp[(masks - 1) * n + root] >= INF {
        return Err(Error::NoTree);
    }
    let mut edges = BTreeSet::new();
    let mut stack = vec![(masks - 1, root)];
    while let Some((mask, v)) = stack.pop() {
        match how[mask * n + v] {
            Choice::Leaf => {}
            Choice::Split(sub) => {
                stack.push((sub as usize, v));
                stack.push((mask ^ sub as usize, v));
            }
            Choice::Edge(u) => {
                let u = u as usize;
                edges.insert((u.min(v), u.max(v)));
                stack.push((mask, u));
            }
            Choice::Unset => unreachable!("reconstruction reached an unset state"),
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    debug_assert_eq!(edges.len() as u32, dp[(masks - 1) * n + root]);
    Ok(SteinerTree {
        node_count: edges.len() + 1,
        edges,
    })
}

/// Every compact set of `g`, ordered by size and then lexicographically.
pub fn enumerate_compact_sets(g: &Graph, limits: &Limits) -> Result<Vec<NodeSet>> {
    let n = g.n();
    if n > limits.compact_nodes || n > 64 {
        return Err(Error::LimitExceeded {
            what: "compact set enumeration",
            size: n as u64,
            limit: limits.compact_nodes.min(64) as u64,
        });
    }
    let adj = g.adjacency_masks().expect("checked size");
    let all = full(n);
    let mut out: Vec<u64> = (1..all)
        .filter(|&m| bits::is_connected(&adj, m) && bits::is_connected(&adj, all ^ m))
        .collect();
    out.sort_by(|&a, &b| {
        a.count_ones().cmp(&b.count_ones()).then_with(|| {
            if a == b {
                core::cmp::Ordering::Equal
            } else if bits::lex_less(a, b) {
                core::cmp::Ordering::Less
            } else {
                core::cmp::Ordering::Greater
            }
        })
    });
    Ok(out.into_iter().map(NodeSet::from_mask).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanReport {
    pub sigma: Rational,
    pub argmax_set: NodeSet,
    pub boundary: NodeSet,
    pub steiner_tree: Vec<(usize, usize)>,
    pub steiner_node_count: usize,
    /// True when every compact set was examined.
    pub exhaustive: bool,
    /// Number of compact sets examined.
    pub sets: usize,
}

fn require_connected(g: &Graph) -> Result<()> {
    if g.n() < 2 {
        return Err(Error::input("span needs at least 2 nodes"));
    }
    if !g.is_connected() {
        return Err(Error::input("span is defined for connected graphs"));
    }
    Ok(())
}

/// Tracks the best ratio; the first set reaching it is kept.
struct Argmax {
    best: Option<(usize, usize, NodeSet, NodeSet)>,
}

impl Argmax {
    fn offer(&mut self, count: usize, b: usize, u: &NodeSet, boundary: &NodeSet) {
        let better = match &self.best {
            None => true,
            Some((c, bb, _, _)) => count * bb > c * b,
        };
        if better {
            self.best = Some((count, b, u.clone(), boundary.clone()));
        }
    }

    fn report(self, g: &Graph, limits: &Limits, exhaustive: bool, sets: usize) -> Result<SpanReport> {
        let (count, b, u, boundary) = self
            .best
            .ok_or_else(|| Error::Sampling("no compact set accepted".into()))?;
        let tree = steiner_tree_min_with(g, &boundary, limits)?;
        debug_assert_eq!(tree.node_count, count);
        Ok(SpanReport {
            sigma: ratio(count, b),
            argmax_set: g.to_labels(&u),
            boundary: g.to_labels(&boundary),
            steiner_tree: tree.edges.iter().map(|&(x, y)| (g.label(x), g.label(y))).collect(),
            steiner_node_count: tree.node_count,
            exhaustive,
            sets,
        })
    }
}

/// Exact span: every compact set is examined. Ties keep the first set in
/// [`enumerate_compact_sets`] order.
pub fn span_exact(g: &Graph, limits: &Limits) -> Result<SpanReport> {
    require_connected(g)?;
    let sets = enumerate_compact_sets(g, limits)?;
    let mut cache: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut best = Argmax { best: None };
    for u in &sets {
        let b = node_boundary(g, u)?;
        let count = match cache.get(b.as_slice()) {
            Some(&c) => c,
            None => {
                let c = steiner_tree_min_with(g, &b, limits)?.node_count;
                cache.insert(b.as_slice().to_vec(), c);
                c
            }
        };
        best.offer(count, b.len(), u, &b);
    }
    best.report(g, limits, true, sets.len())
}

/// A compact set grown from a random start node towards a random target
/// size by adding random frontier nodes; `None` when the complement of the
/// grown region is disconnected.
pub fn sample_compact_set<R: Rng>(g: &Graph, rng: &mut R) -> Option<NodeSet> {
    let n = g.n();
    if n < 2 {
        return None;
    }
    let target = rng.gen_range(1..n);
    let start = rng.gen_range(0..n);
    let mut inside = vec![false; n];
    let mut queued = vec![false; n];
    let mut frontier = Vec::new();
    let mut size = 0;
    let take = |v: usize, inside: &mut Vec<bool>, queued: &mut Vec<bool>, frontier: &mut Vec<usize>| {
        inside[v] = true;
        for &w in g.neighbors(v) {
            if !inside[w] && !queued[w] {
                queued[w] = true;
                frontier.push(w);
            }
        }
    };
    queued[start] = true;
    take(start, &mut inside, &mut queued, &mut frontier);
    size += 1;
    while size < target && !frontier.is_empty() {
        let i = rng.gen_range(0..frontier.len());
        let v = frontier.swap_remove(i);
        take(v, &mut inside, &mut queued, &mut frontier);
        size += 1;
    }
    let set: NodeSet = (0..n).filter(|&v| inside[v]).collect();
    if set.len() == n || !induces_connected(g, &set.complement(n)).ok()? {
        return None;
    }
    Some(set)
}

/// Lower bound on the span from up to `trials` sampled compact sets.
/// Samples whose boundary exceeds the Steiner terminal limit are skipped.
pub fn span_sampled(g: &Graph, trials: usize, seed: u64, limits: &Limits) -> Result<SpanReport> {
    require_connected(g)?;
    if trials == 0 {
        return Err(Error::input("trials must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = trials.saturating_mul(20).max(100);
    let mut best = Argmax { best: None };
    let mut accepted = 0;
    let mut cache: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for _ in 0..cap {
        if accepted == trials {
            break;
        }
        let Some(u) = sample_compact_set(g, &mut rng) else {
            continue;
        };
        let b = node_boundary(g, &u)?;
        if b.len() > limits.steiner_terminals {
            continue;
        }
        let count = match cache.get(b.as_slice()) {
            Some(&c) => c,
            None => {
                let c = steiner_tree_min_with(g, &b, limits)?.node_count;
                cache.insert(b.as_slice().to_vec(), c);
                c
            }
        };
        best.offer(count, b.len(), &u, &b);
        accepted += 1;
    }
    if accepted == 0 {
        return Err(Error::Sampling(alloc::format!(
            "no compact set accepted in {cap} attempts"
        )));
    }
    best.report(g, limits, false, accepted)
}

fn mesh_boundary(dims: &[usize], u: &NodeSet) -> Result<(MeshShape, Graph, NodeSet)> {
    let shape = MeshShape::new(dims, &Limits::default())?;
    let g = shape.graph();
    u.validate(g.n())?;
    if u.is_empty() || u.len() == g.n() || !is_compact(&g, u)? {
        return Err(Error::input("set is not compact in the mesh"));
    }
    let b = node_boundary(&g, u)?;
    Ok((shape, g, b))
}

fn virtual_adjacent(a: &[usize], b: &[usize]) -> bool {
    let mut differ = 0;
    for (x, y) in a.iter().zip(b) {
        match x.abs_diff(*y) {
            0 => {}
            1 => differ += 1,
            _ => return false,
        }
    }
    (1..=2).contains(&differ)
}

/// The boundary `B = Γ(u)` of a compact mesh set with virtual edges between
/// nodes that differ by at most one in at most two coordinates. Node `i`
/// carries the mesh id of the `i`-th boundary node as its label.
pub fn mesh_virtual_boundary_graph(dims: &[usize], u: &NodeSet) -> Result<Graph> {
    let (shape, _, b) = mesh_boundary(dims, u)?;
    virtual_graph(&shape, &b)
}

fn virtual_graph(shape: &MeshShape, b: &NodeSet) -> Result<Graph> {
    let coords: Vec<Vec<usize>> = b.iter().map(|v| shape.coords(v)).collect();
    let mut edges = Vec::new();
    for i in 0..coords.len() {
        for j in i + 1..coords.len() {
            if virtual_adjacent(&coords[i], &coords[j]) {
                edges.push((i, j));
            }
        }
    }
    Graph::from_labelled_edges(b.as_slice().to_vec(), shape.node_count(), &edges)
}

/// Explicit tree certificate for one compact mesh set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshSpanCertificate {
    pub boundary: NodeSet,
    pub virtual_connected: bool,
    /// Real mesh edges obtained by expanding a spanning tree of the virtual
    /// graph, sorted.
    pub tree_edges: Vec<(usize, usize)>,
    /// Nodes touched by `tree_edges` together with the boundary.
    pub node_count: usize,
    /// All checks passed: virtual graph connected, every edge a mesh edge,
    /// edges connect the whole boundary, at most `2(|B| - 1)` edges.
    pub ok: bool,
}

pub fn mesh_span_certificate(dims: &[usize], u: &NodeSet) -> Result<MeshSpanCertificate> {
    let (shape, g, b) = mesh_boundary(dims, u)?;
    let vg = virtual_graph(&shape, &b)?;
    let k = vg.n();

    // BFS spanning tree of the virtual graph from its smallest node.
    let mut parent = vec![usize::MAX; k];
    let mut order = vec![0];
    parent[0] = 0;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        for &w in vg.neighbors(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                order.push(w);
            }
        }
    }
    let virtual_connected = order.len() == k;

    let mut real = BTreeSet::new();
    let mut add = |a: usize, c: usize| {
        real.insert((a.min(c), a.max(c)));
    };
    for &w in order.iter().skip(1) {
        let (x, y) = (vg.label(parent[w]), vg.label(w));
        let (cx, cy) = (shape.coords(x), shape.coords(y));
        let diffs: Vec<usize> = (0..cx.len()).filter(|&d| cx[d] != cy[d]).collect();
        if diffs.len() == 1 {
            add(x, y);
        } else {
            let mut mid = cx.clone();
            mid[diffs[0]] = cy[diffs[0]];
            let m = shape.id_of(&mid);
            add(x, m);
            add(m, y);
        }
    }
    let tree_edges: Vec<_> = real.into_iter().collect();

    let all_real = tree_edges.iter().all(|&(a, c)| g.has_edge(a, c));
    let mut nodes: Vec<usize> = tree_edges.iter().flat_map(|&(a, c)| [a, c]).chain(b.iter()).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let spans = edges_connect(&nodes, &tree_edges);
    let small = tree_edges.len() <= 2 * (b.len() - 1);
    Ok(MeshSpanCertificate {
        ok: virtual_connected && all_real && spans && small,
        boundary: b,
        virtual_connected,
        node_count: nodes.len(),
        tree_edges,
    })
}

/// Whether the edge list connects all of `nodes` (sorted, deduplicated).
fn edges_connect(nodes: &[usize], edges: &[(usize, usize)]) -> bool {
    let idx = |v: usize| nodes.binary_search(&v).expect("edge endpoint listed");
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn root(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut parts = nodes.len();
    for &(a, c) in edges {
        let (ra, rc) = (root(&mut parent, idx(a)), root(&mut parent, idx(c)));
        if ra != rc {
            parent[ra] = rc;
            parts -= 1;
        }
    }
    parts <= 1
}

/// Whether the explicit certificate for `u` passes every check.
pub fn verify_mesh_span_certificate(dims: &[usize], u: &NodeSet) -> Result<bool> {
    Ok(mesh_span_certificate(dims, u)?.ok)
}
