//! Immutable undirected simple graphs with boundary and connectivity
//! primitives.
//!
//! Nodes are dense ids `0..n`. Every graph also carries a label per node: the
//! node's id in the root graph it was derived from. Labels are strictly
//! increasing, so subgraphs produced by node removal keep a back-map to the
//! original coordinates without any extra bookkeeping by the caller.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::rational::{ratio, Rational};
use crate::{Error, Result};

/// A set of node ids in canonical (sorted ascending, duplicate-free) form.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new() -> Self {
        NodeSet(Vec::new())
    }

    pub fn singleton(v: usize) -> Self {
        NodeSet(vec![v])
    }

    /// The set `{0, .., n-1}`.
    pub fn range(n: usize) -> Self {
        NodeSet((0..n).collect())
    }

    pub(crate) fn from_sorted(ids: Vec<usize>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        NodeSet(ids)
    }

    pub fn from_mask(mask: u64) -> Self {
        NodeSet(crate::bits::bits(mask).collect())
    }

    /// Bitmask of the members. All members must be below 64.
    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &v| m | 1 << v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    /// Checks that every member is a valid id for a graph with `n` nodes.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&id) if id >= n => Err(Error::InvalidNode { id, n }),
            _ => Ok(()),
        }
    }

    pub fn complement(&self, n: usize) -> NodeSet {
        let mut out = Vec::with_capacity(n.saturating_sub(self.len()));
        let mut it = self.0.iter().peekable();
        for v in 0..n {
            if it.peek() == Some(&&v) {
                it.next();
            } else {
                out.push(v);
            }
        }
        NodeSet(out)
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.iter().filter(|&v| !other.contains(v)).collect())
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| !other.contains(v))
    }

    /// Canonical order used for every tie-break: smaller sets first, then
    /// lexicographic order of the sorted id lists.
    pub fn canonical_cmp(&self, other: &NodeSet) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    pub(crate) fn membership(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for v in self.iter() {
            m[v] = true;
        }
        m
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }
}

impl From<Vec<usize>> for NodeSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[usize; N]> for NodeSet {
    fn from(v: [usize; N]) -> Self {
        v.into_iter().collect()
    }
}

/// Undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    labels: Vec<usize>,
    universe: usize,
    edge_count: usize,
    max_degree: usize,
}

impl Graph {
    /// Edgeless graph on `n` nodes.
    pub fn empty(n: usize) -> Graph {
        Graph::from_adjacency(vec![Vec::new(); n], (0..n).collect(), n)
    }

    /// Builds a graph from an edge list. Either orientation is accepted;
    /// self-loops, duplicates and out-of-range ids are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::InvalidNode { id: u, n });
            }
            if v >= n {
                return Err(Error::InvalidNode { id: v, n });
            }
            if u == v {
                return Err(Error::input(format!("self-loop at node {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::input(format!(
                    "duplicate edge ({}, {})",
                    u.min(w[0]),
                    u.max(w[0])
                )));
            }
        }
        Ok(Graph::from_adjacency(adj, (0..n).collect(), n))
    }

    /// Same as [`Graph::from_edges`] but node `i` is labelled `labels[i]` in a
    /// root graph with `universe` nodes. Labels must be strictly increasing.
    pub fn from_labelled_edges(labels: Vec<usize>, universe: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("labels must be strictly increasing"));
        }
        if let Some(&last) = labels.last() {
            if last >= universe {
                return Err(Error::InvalidNode { id: last, n: universe });
            }
        }
        let g = Graph::from_edges(labels.len(), edges)?;
        Ok(Graph::from_adjacency(g.adj, labels, universe))
    }

    /// Adjacency lists must already be symmetric and duplicate-free.
    pub(crate) fn from_adjacency(mut adj: Vec<Vec<usize>>, labels: Vec<usize>, universe: usize) -> Graph {
        let mut twice = 0;
        let mut max_degree = 0;
        for list in adj.iter_mut() {
            list.sort_unstable();
            twice += list.len();
            max_degree = max_degree.max(list.len());
        }
        Graph {
            adj,
            labels,
            universe,
            edge_count: twice / 2,
            max_degree,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Id of node `v` in the root graph.
    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Node count of the root graph this graph was derived from.
    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn local_id(&self, label: usize) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    /// Translates a set of local ids to root-graph ids.
    pub fn to_labels(&self, set: &NodeSet) -> NodeSet {
        NodeSet::from_sorted(set.iter().map(|v| self.labels[v]).collect())
    }

    /// Translates root-graph ids to local ids; fails on ids not present.
    pub fn from_labels(&self, set: &NodeSet) -> Result<NodeSet> {
        set.iter()
            .map(|l| {
                self.local_id(l)
                    .ok_or_else(|| Error::input(format!("node {l} is not part of this graph")))
            })
            .collect::<Result<Vec<_>>>()
            .map(NodeSet::from_sorted)
    }

    /// Adjacency as bitmasks, available for graphs with at most 64 nodes.
    pub fn adjacency_masks(&self) -> Option<Vec<u64>> {
        (self.n() <= 64).then(|| {
            self.adj
                .iter()
                .map(|list| list.iter().fold(0u64, |m, &v| m | 1 << v))
                .collect()
        })
    }

    /// Subgraph induced by `keep`; ids are renumbered, labels carried over.
    pub fn induced(&self, keep: &NodeSet) -> Result<Graph> {
        keep.validate(self.n())?;
        let mut map = vec![usize::MAX; self.n()];
        for (i, v) in keep.iter().enumerate() {
            map[v] = i;
        }
        let adj = keep
            .iter()
            .map(|v| {
                self.adj[v]
                    .iter()
                    .filter(|&&w| map[w] != usize::MAX)
                    .map(|&w| map[w])
                    .collect()
            })
            .collect();
        let labels = keep.iter().map(|v| self.labels[v]).collect();
        Ok(Graph::from_adjacency(adj, labels, self.universe))
    }

    /// Subgraph on all nodes keeping the edges accepted by `keep`.
    pub fn edge_subgraph(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Graph {
        let mut adj = vec![Vec::new(); self.n()];
        for (u, v) in self.edges() {
            if keep(u, v) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        Graph::from_adjacency(adj, self.labels.clone(), self.universe)
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || bfs_reach(self, 0, None).iter().all(|&r| r)
    }
}

fn bfs_reach(g: &Graph, start: usize, within: Option<&[bool]>) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if !seen[w] && within.is_none_or(|m| m[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// `Γ(s)`: nodes outside `s` adjacent to some member of `s`.
pub fn node_boundary(g: &Graph, s: &NodeSet) -> Result<NodeSet> {
    s.validate(g.n())?;
    let inside = s.membership(g.n());
    let mut out: Vec<usize> = s
        .iter()
        .flat_map(|v| g.neighbors(v).iter().copied())
        .filter(|&w| !inside[w])
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(NodeSet::from_sorted(out))
}

/// Edges with exactly one endpoint in `s`, as `(min, max)` pairs, sorted.
pub fn edge_boundary(g: &Graph, s: &NodeSet) -> Result<Vec<(usize, usize)>> {
    s.validate(g.n())?;
    let inside = s.membership(g.n());
    let mut out: Vec<(usize, usize)> = s
        .iter()
        .flat_map(|v| g.neighbors(v).iter().map(move |&w| (v, w)))
        .filter(|&(_, w)| !inside[w])
        .map(|(v, w)| (v.min(w), v.max(w)))
        .collect();
    out.sort_unstable();
    Ok(out)
}

pub(crate) fn edge_boundary_size(g: &Graph, inside: &[bool], s: &NodeSet) -> usize {
    s.iter()
        .map(|v| g.neighbors(v).iter().filter(|&&w| !inside[w]).count())
        .sum()
}

/// Maximal connected node sets, largest first, ties by smallest id.
pub fn connected_components(g: &Graph) -> Vec<NodeSet> {
    let mut comp = vec![usize::MAX; g.n()];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for start in 0..g.n() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = parts.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut i = 0;
        while i < members.len() {
            let v = members[i];
            i += 1;
            for &w in g.neighbors(v) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        parts.push(members);
    }
    parts.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    parts.into_iter().map(NodeSet::from_sorted).collect()
}

/// Whether `s` induces a connected subgraph. The empty set is not connected.
pub fn induces_connected(g: &Graph, s: &NodeSet) -> Result<bool> {
    s.validate(g.n())?;
    let Some(first) = s.first() else {
        return Ok(false);
    };
    let inside = s.membership(g.n());
    let seen = bfs_reach(g, first, Some(&inside));
    Ok(s.iter().all(|v| seen[v]))
}

/// `u` is compact when both `u` and its complement induce connected subgraphs.
pub fn is_compact(g: &Graph, u: &NodeSet) -> Result<bool> {
    u.validate(g.n())?;
    if u.is_empty() || u.len() == g.n() {
        return Err(Error::input(
            "compactness is undefined for the empty set and the whole node set",
        ));
    }
    Ok(induces_connected(g, u)? && induces_connected(g, &u.complement(g.n()))?)
}

/// Calls `f` with the bitmask of every connected node set with at most
/// `max_size` nodes, each once. Needs at most 64 nodes and stops with
/// [`Error::LimitExceeded`] after `cap` sets. Returns the number of sets.
pub fn for_each_connected_set(g: &Graph, max_size: usize, cap: u64, f: impl FnMut(u64)) -> Result<u64> {
    let adj = g.adjacency_masks().ok_or(Error::LimitExceeded {
        what: "connected set enumeration",
        size: g.n() as u64,
        limit: 64,
    })?;
    crate::bits::for_each_connected_subset(&adj, g.n(), max_size, cap, f)
}

/// Induced subgraph on `V \ s`, keeping the label back-map.
pub fn remove_nodes(g: &Graph, s: &NodeSet) -> Result<Graph> {
    s.validate(g.n())?;
    g.induced(&s.complement(g.n()))
}

/// A node subset with its boundaries and expansion ratios.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub set: NodeSet,
    pub node_boundary: NodeSet,
    pub edge_boundary_size: usize,
    /// `|Γ(set)| / |set|`
    pub node_ratio: Rational,
    /// `|(set, V \ set)| / min(|set|, |V \ set|)`
    pub edge_ratio: Rational,
}

impl Cut {
    /// Requires `1 <= |set| <= n - 1`.
    pub fn new(g: &Graph, set: NodeSet) -> Result<Cut> {
        set.validate(g.n())?;
        if set.is_empty() || set.len() >= g.n() {
            return Err(Error::input("a cut needs a nonempty proper subset"));
        }
        let inside = set.membership(g.n());
        let node_boundary = node_boundary(g, &set)?;
        let edges = edge_boundary_size(g, &inside, &set);
        let small = set.len().min(g.n() - set.len());
        Ok(Cut {
            node_ratio: ratio(node_boundary.len(), set.len()),
            edge_ratio: ratio(edges, small),
            edge_boundary_size: edges,
            node_boundary,
            set,
        })
    }
}
