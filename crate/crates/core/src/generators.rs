//! Graph families: meshes, hypercubes, cycles, random regular graphs and the
//! chain subdivision used for the lower-bound constructions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, NodeSet};
use crate::{Error, Limits, Result};

/// Shape of a `d`-dimensional mesh with row-major (last coordinate fastest)
/// node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshShape {
    dims: Vec<usize>,
    strides: Vec<usize>,
    nodes: usize,
}

impl MeshShape {
    pub fn new(dims: &[usize], limits: &Limits) -> Result<MeshShape> {
        if dims.is_empty() {
            return Err(Error::input("mesh needs at least one dimension"));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::input(format!("mesh side {d} is below 2")));
        }
        let mut nodes: usize = 1;
        for &d in dims {
            nodes = nodes
                .checked_mul(d)
                .filter(|&n| n <= limits.max_nodes)
                .ok_or(Error::LimitExceeded {
                    what: "mesh node count",
                    size: u64::MAX,
                    limit: limits.max_nodes as u64,
                })?;
        }
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len() - 1).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Ok(MeshShape {
            dims: dims.to_vec(),
            strides,
            nodes,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn coords(&self, id: usize) -> Vec<usize> {
        self.dims.iter().zip(&self.strides).map(|(&d, &s)| id / s % d).collect()
    }

    pub fn id_of(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(&c, &s)| c * s).sum()
    }

    pub fn graph(&self) -> Graph {
        let mut edges = Vec::new();
        for id in 0..self.nodes {
            for (i, &s) in self.strides.iter().enumerate() {
                if id / s % self.dims[i] + 1 < self.dims[i] {
                    edges.push((id, id + s));
                }
            }
        }
        Graph::from_edges(self.nodes, &edges).expect("mesh edges are simple")
    }
}

/// Mesh without wraparound, e.g. `mesh(&[4, 4])` is the 4×4 grid.
pub fn mesh(dims: &[usize]) -> Result<Graph> {
    mesh_with(dims, &Limits::default())
}

pub fn mesh_with(dims: &[usize], limits: &Limits) -> Result<Graph> {
    Ok(MeshShape::new(dims, limits)?.graph())
}

pub fn hypercube(d: usize) -> Result<Graph> {
    hypercube_with(d, &Limits::default())
}

pub fn hypercube_with(d: usize, limits: &Limits) -> Result<Graph> {
    if d == 0 {
        return Err(Error::input("hypercube dimension must be at least 1"));
    }
    if d >= usize::BITS as usize || (1usize << d) > limits.max_nodes {
        return Err(Error::LimitExceeded {
            what: "hypercube node count",
            size: d as u64,
            limit: limits.max_nodes as u64,
        });
    }
    let n = 1usize << d;
    let edges: Vec<_> = (0..n)
        .flat_map(|v| (0..d).map(move |b| (v, v ^ (1 << b))).filter(|&(u, w)| u < w))
        .collect();
    Graph::from_edges(n, &edges)
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::input("cycle needs at least 3 nodes"));
    }
    let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    Graph::from_edges(n, &edges)
}

pub fn path(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::input("path needs at least 1 node"));
    }
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    Graph::from_edges(n, &edges)
}

pub fn complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::input("complete graph needs at least 2 nodes"));
    }
    let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Graph::from_edges(n, &edges)
}

const PAIRING_ATTEMPTS: usize = 10_000;

/// Uniform simple `d`-regular graph from the pairing (configuration) model,
/// rejecting pairings with loops or multi-edges. Deterministic per seed.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if !(n * d).is_multiple_of(2) {
        return Err(Error::input("n*d must be even"));
    }
    if d >= n {
        return Err(Error::input("degree must be below the node count"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..PAIRING_ATTEMPTS {
        points.shuffle(&mut rng);
        let mut adj = vec![Vec::with_capacity(d); n];
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || adj[u].contains(&v) {
                continue 'attempt;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        return Ok(Graph::from_adjacency(adj, (0..n).collect(), n));
    }
    Err(Error::Generation(format!(
        "no simple {d}-regular pairing on {n} nodes after {PAIRING_ATTEMPTS} attempts"
    )))
}

/// One subdivided edge: the `k` chain nodes between base nodes `u < v`,
/// ordered from `u` towards `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub u: usize,
    pub v: usize,
    pub nodes: Vec<usize>,
}

/// A base graph with every edge replaced by a chain of `k` nodes.
///
/// Base nodes keep their ids `0..n`; chain nodes follow contiguously, chain
/// by chain in sorted base-edge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdividedGraph {
    pub graph: Graph,
    pub base_nodes: NodeSet,
    pub chains: Vec<Chain>,
    pub k: usize,
}

impl SubdividedGraph {
    /// Base graph recovered by contracting every chain.
    pub fn contracted(&self) -> Result<Graph> {
        let edges: Vec<_> = self.chains.iter().map(|c| (c.u, c.v)).collect();
        Graph::from_edges(self.base_nodes.len(), &edges)
    }

    /// Maximum degree of the base graph.
    pub fn base_max_degree(&self) -> usize {
        self.base_nodes.iter().map(|v| self.graph.degree(v)).max().unwrap_or(0)
    }

    /// Checks the structural invariants; used after loading from disk.
    pub fn validate(&self) -> Result<()> {
        let n = self.base_nodes.len();
        if self.k == 0 {
            return Err(Error::input("chain length must be at least 1"));
        }
        if self.base_nodes != NodeSet::range(n) {
            return Err(Error::input("base nodes must be 0..n"));
        }
        if self.graph.n() != n + self.chains.len() * self.k {
            return Err(Error::input("node count does not match n + m*k"));
        }
        for c in &self.chains {
            if c.nodes.len() != self.k || c.u >= c.v || c.v >= n {
                return Err(Error::input("malformed chain"));
            }
            let mut walk = Vec::with_capacity(self.k + 2);
            walk.push(c.u);
            walk.extend_from_slice(&c.nodes);
            walk.push(c.v);
            if !walk.windows(2).all(|w| self.graph.has_edge(w[0], w[1])) {
                return Err(Error::input("chain is not a path in the graph"));
            }
            if c.nodes.iter().any(|&x| x < n || self.graph.degree(x) != 2) {
                return Err(Error::input("chain node is not an interior degree-2 node"));
            }
        }
        Ok(())
    }
}

pub fn subdivide_edges(g: &Graph, k: usize) -> Result<SubdividedGraph> {
    if k == 0 {
        return Err(Error::input("chain length must be at least 1"));
    }
    let n = g.n();
    let mut edges = Vec::with_capacity(g.edge_count() * (k + 1));
    let mut chains = Vec::with_capacity(g.edge_count());
    let mut next = n;
    for (u, v) in g.edges() {
        let nodes: Vec<usize> = (next..next + k).collect();
        next += k;
        edges.push((u, nodes[0]));
        edges.extend(nodes.windows(2).map(|w| (w[0], w[1])));
        edges.push((nodes[k - 1], v));
        chains.push(Chain { u, v, nodes });
    }
    Ok(SubdividedGraph {
        graph: Graph::from_edges(next, &edges)?,
        base_nodes: NodeSet::range(n),
        chains,
        k,
    })
}
