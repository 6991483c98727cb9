//! File formats: the graph text format, JSON sidecars for subdivided graphs,
//! fault patterns, and the JSON reports written by the tool.
//!
//! Graph text format: UTF-8, lines starting with `#` are comments, blank
//! lines are ignored. The first data line is `n m`, followed by exactly `m`
//! lines `u v` with `0 <= u < v < n`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use xpand_core::expansion::{ExpansionResult, Method, Mode};
use xpand_core::faults::{FaultKind, FaultPattern, Provenance};
use xpand_core::generators::{Chain, SubdividedGraph};
use xpand_core::pruning::{Algorithm, CompactStep, PruneStep, PruneTrace, ShatterOutcome};
use xpand_core::span::SpanReport;
use xpand_core::{Graph, NodeSet, Rational};

use crate::{Error, Result};

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let pair = |lineno: usize, line: &str| -> Result<(usize, usize)> {
        let mut it = line.split_whitespace();
        let bad = || {
            Error::format(format!(
                "line {lineno}: expected two non-negative integers, got {line:?}"
            ))
        };
        let a = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let b = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if it.next().is_some() {
            return Err(bad());
        }
        Ok((a, b))
    };
    let (lineno, header) = lines.next().ok_or_else(|| Error::format("empty graph file"))?;
    let (n, m) = pair(lineno, header)?;
    let mut edges = Vec::with_capacity(m);
    for (lineno, line) in lines {
        let (u, v) = pair(lineno, line)?;
        if u >= v || v >= n {
            return Err(Error::format(format!(
                "line {lineno}: edge ({u}, {v}) must satisfy u < v < {n}"
            )));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(Error::format(format!(
            "header declares {m} edges, found {}",
            edges.len()
        )));
    }
    Graph::from_edges(n, &edges).map_err(|e| Error::format(format!("invalid graph: {e}")))
}

pub fn graph_to_text(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::format(format!("{}: not UTF-8", path.display())))?;
    parse_graph(&text).map_err(|e| Error::format(format!("{}: {e}", path.display())))
}

/// Parses `num/den` or a bare integer. Floats are rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::format(format!("expected a rational num/den, got {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (
            a.trim().parse::<i64>().map_err(|_| bad())?,
            b.trim().parse::<i64>().map_err(|_| bad())?,
        ),
        None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
    };
    if den <= 0 {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Prints a rational as `num/den`.
pub fn rational_text(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: i64,
    pub den: i64,
}

impl From<Rational> for RationalJson {
    fn from(r: Rational) -> Self {
        RationalJson {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl TryFrom<RationalJson> for Rational {
    type Error = Error;

    fn try_from(r: RationalJson) -> Result<Rational> {
        if r.den <= 0 {
            return Err(Error::format("rational with non-positive denominator"));
        }
        Ok(Rational::new(r.num, r.den))
    }
}

/// Pretty JSON followed by a newline.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainJson {
    pub u: usize,
    pub v: usize,
    pub nodes: Vec<usize>,
}

/// Metadata stored next to the graph file of a subdivided graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarJson {
    pub k: usize,
    pub base_nodes: Vec<usize>,
    pub chains: Vec<ChainJson>,
}

impl SidecarJson {
    pub fn from_subdivided(h: &SubdividedGraph) -> Self {
        SidecarJson {
            k: h.k,
            base_nodes: h.base_nodes.as_slice().to_vec(),
            chains: h
                .chains
                .iter()
                .map(|c| ChainJson {
                    u: c.u,
                    v: c.v,
                    nodes: c.nodes.clone(),
                })
                .collect(),
        }
    }

    /// Joins the metadata with its graph and validates the result.
    pub fn into_subdivided(self, graph: Graph) -> Result<SubdividedGraph> {
        let h = SubdividedGraph {
            graph,
            base_nodes: NodeSet::from(self.base_nodes),
            chains: self
                .chains
                .into_iter()
                .map(|c| Chain {
                    u: c.u,
                    v: c.v,
                    nodes: c.nodes,
                })
                .collect(),
            k: self.k,
        };
        h.validate()
            .map_err(|e| Error::format(format!("sidecar does not match graph: {e}")))?;
        Ok(h)
    }
}

pub fn read_subdivided(graph_path: &Path, meta_path: &Path) -> Result<SubdividedGraph> {
    let g = read_graph(graph_path)?;
    let meta: SidecarJson = serde_json::from_slice(&read_bytes(meta_path)?)?;
    meta.into_subdivided(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ProvenanceJson {
    Random {
        p: f64,
        seed: u64,
    },
    Strategy {
        name: String,
        params: BTreeMap<String, String>,
    },
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultPatternJson {
    /// `node-faults` or `edge-survival`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kept_edges: Option<Vec<[usize; 2]>>,
    pub host_nodes: usize,
    pub provenance: ProvenanceJson,
}

impl From<&FaultPattern> for FaultPatternJson {
    fn from(p: &FaultPattern) -> Self {
        let (kind, failed, kept_edges) = match &p.kind {
            FaultKind::Nodes(s) => ("node-faults", Some(s.as_slice().to_vec()), None),
            FaultKind::EdgeSurvival(e) => ("edge-survival", None, Some(e.iter().map(|&(u, v)| [u, v]).collect())),
        };
        FaultPatternJson {
            kind: kind.into(),
            failed,
            kept_edges,
            host_nodes: p.host_nodes,
            provenance: match &p.provenance {
                Provenance::Random { p, seed } => ProvenanceJson::Random { p: *p, seed: *seed },
                Provenance::Strategy { name, params } => ProvenanceJson::Strategy {
                    name: name.clone(),
                    params: params.iter().cloned().collect(),
                },
                Provenance::Manual => ProvenanceJson::Manual,
            },
        }
    }
}

impl TryFrom<FaultPatternJson> for FaultPattern {
    type Error = Error;

    fn try_from(j: FaultPatternJson) -> Result<FaultPattern> {
        let kind = match (j.kind.as_str(), j.failed, j.kept_edges) {
            ("node-faults", Some(f), None) => {
                if f.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::format("failed nodes must be sorted and distinct"));
                }
                FaultKind::Nodes(NodeSet::from(f))
            }
            ("edge-survival", None, Some(e)) => FaultKind::EdgeSurvival(e.into_iter().map(|[u, v]| (u, v)).collect()),
            (k, _, _) => {
                return Err(Error::format(format!(
                    "fault pattern of kind {k:?} needs exactly one of `failed` (node-faults) or `kept_edges` (edge-survival)"
                )))
            }
        };
        Ok(FaultPattern {
            kind,
            host_nodes: j.host_nodes,
            provenance: match j.provenance {
                ProvenanceJson::Random { p, seed } => Provenance::Random { p, seed },
                ProvenanceJson::Strategy { name, params } => Provenance::Strategy {
                    name,
                    params: params.into_iter().collect(),
                },
                ProvenanceJson::Manual => Provenance::Manual,
            },
        })
    }
}

pub fn read_fault_pattern(path: &Path) -> Result<FaultPattern> {
    let j: FaultPatternJson = serde_json::from_slice(&read_bytes(path)?)?;
    j.try_into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionJson {
    pub mode: String,
    pub method: String,
    /// False for heuristic values, which are upper bounds.
    pub certified: bool,
    pub value_num: i64,
    pub value_den: i64,
    pub witness: Vec<usize>,
    pub boundary: Vec<usize>,
    pub edge_boundary_size: usize,
}

impl From<&ExpansionResult> for ExpansionJson {
    fn from(r: &ExpansionResult) -> Self {
        ExpansionJson {
            mode: match r.mode {
                Mode::Node => "node",
                Mode::Edge => "edge",
            }
            .into(),
            method: match r.method {
                Method::Exact => "exact",
                Method::Heuristic => "heuristic",
            }
            .into(),
            certified: r.method == Method::Exact,
            value_num: *r.value.numer(),
            value_den: *r.value.denom(),
            witness: r.witness.set.as_slice().to_vec(),
            boundary: r.witness.node_boundary.as_slice().to_vec(),
            edge_boundary_size: r.witness.edge_boundary_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactJson {
    pub set: Vec<usize>,
    pub boundary: usize,
    pub ratio: RationalJson,
    pub compact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepJson {
    pub graph_size: usize,
    pub graph_connected: bool,
    pub set: Vec<usize>,
    pub boundary: usize,
    pub ratio: RationalJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compact: Option<CompactJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceJson {
    pub algorithm: String,
    pub threshold: RationalJson,
    pub eps: RationalJson,
    pub universe: usize,
    pub faults: Vec<usize>,
    pub steps: Vec<StepJson>,
    pub survivor: Vec<usize>,
    pub certified: bool,
}

impl From<&PruneTrace> for TraceJson {
    fn from(t: &PruneTrace) -> Self {
        TraceJson {
            algorithm: match t.algorithm {
                Algorithm::Prune => "prune",
                Algorithm::Prune2 => "prune2",
            }
            .into(),
            threshold: t.threshold.into(),
            eps: t.eps.into(),
            universe: t.universe,
            faults: t.faults.as_slice().to_vec(),
            steps: t
                .steps
                .iter()
                .map(|s| StepJson {
                    graph_size: s.graph_size,
                    graph_connected: s.graph_connected,
                    set: s.set.as_slice().to_vec(),
                    boundary: s.boundary,
                    ratio: s.ratio.into(),
                    compact: s.compact.as_ref().map(|c| CompactJson {
                        set: c.set.as_slice().to_vec(),
                        boundary: c.boundary,
                        ratio: c.ratio.into(),
                        compact: c.compact,
                    }),
                })
                .collect(),
            survivor: t.survivor.as_slice().to_vec(),
            certified: t.certified,
        }
    }
}

impl TryFrom<TraceJson> for PruneTrace {
    type Error = Error;

    fn try_from(j: TraceJson) -> Result<PruneTrace> {
        let algorithm = match j.algorithm.as_str() {
            "prune" => Algorithm::Prune,
            "prune2" => Algorithm::Prune2,
            other => return Err(Error::format(format!("unknown algorithm {other:?}"))),
        };
        let steps = j
            .steps
            .into_iter()
            .map(|s| {
                Ok(PruneStep {
                    graph_size: s.graph_size,
                    graph_connected: s.graph_connected,
                    set: NodeSet::from(s.set),
                    boundary: s.boundary,
                    ratio: s.ratio.try_into()?,
                    compact: s
                        .compact
                        .map(|c| -> Result<CompactStep> {
                            Ok(CompactStep {
                                set: NodeSet::from(c.set),
                                boundary: c.boundary,
                                ratio: c.ratio.try_into()?,
                                compact: c.compact,
                            })
                        })
                        .transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PruneTrace {
            algorithm,
            threshold: j.threshold.try_into()?,
            eps: j.eps.try_into()?,
            universe: j.universe,
            faults: NodeSet::from(j.faults),
            steps,
            survivor: NodeSet::from(j.survivor),
            certified: j.certified,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanJson {
    pub sigma: RationalJson,
    pub exhaustive: bool,
    pub sets: usize,
    pub argmax_set: Vec<usize>,
    pub boundary: Vec<usize>,
    pub steiner_node_count: usize,
    pub steiner_tree: Vec<[usize; 2]>,
}

impl From<&SpanReport> for SpanJson {
    fn from(r: &SpanReport) -> Self {
        SpanJson {
            sigma: r.sigma.into(),
            exhaustive: r.exhaustive,
            sets: r.sets,
            argmax_set: r.argmax_set.as_slice().to_vec(),
            boundary: r.boundary.as_slice().to_vec(),
            steiner_node_count: r.steiner_node_count,
            steiner_tree: r.steiner_tree.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterStepJson {
    pub piece: Vec<usize>,
    pub set: Vec<usize>,
    pub removed: Vec<usize>,
    pub ratio: RationalJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterJson {
    pub eps_frac: RationalJson,
    pub removed_total: usize,
    pub removed: Vec<usize>,
    pub pieces: Vec<Vec<usize>>,
    pub components: Vec<Vec<usize>>,
    pub steps: Vec<ShatterStepJson>,
}

impl ShatterJson {
    pub fn new(eps_frac: Rational, out: &ShatterOutcome) -> Self {
        let ids = |s: &NodeSet| s.as_slice().to_vec();
        ShatterJson {
            eps_frac: eps_frac.into(),
            removed_total: out.removed_total,
            removed: ids(&out.removed),
            pieces: out.pieces.iter().map(ids).collect(),
            components: out.components.iter().map(ids).collect(),
            steps: out
                .steps
                .iter()
                .map(|s| ShatterStepJson {
                    piece: ids(&s.piece),
                    set: ids(&s.set),
                    removed: ids(&s.removed),
                    ratio: s.ratio.into(),
                })
                .collect(),
        }
    }
}
