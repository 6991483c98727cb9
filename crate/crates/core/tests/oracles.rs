//! Exact routines checked against plain enumeration over all subsets.

use proptest::prelude::*;
use xpand_core::expansion::*;
use xpand_core::generators::*;
use xpand_core::graph::*;
use xpand_core::rational::{le_scaled, ratio};
use xpand_core::span::*;
use xpand_core::{Graph, Limits, NodeSet, Rational};

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

fn naive_gamma(g: &Graph, s: &[usize]) -> usize {
    (0..g.n())
        .filter(|&w| !s.contains(&w) && s.iter().any(|&v| g.has_edge(v, w)))
        .count()
}

fn naive_cut(g: &Graph, s: &[usize]) -> usize {
    g.edges().filter(|&(u, v)| s.contains(&u) != s.contains(&v)).count()
}

fn naive_connected(g: &Graph, s: &[usize]) -> bool {
    if s.is_empty() {
        return false;
    }
    let mut seen = vec![s[0]];
    let mut i = 0;
    while i < seen.len() {
        let v = seen[i];
        i += 1;
        for &w in s {
            if !seen.contains(&w) && g.has_edge(v, w) {
                seen.push(w);
            }
        }
    }
    seen.len() == s.len()
}

fn brute_node(g: &Graph) -> Rational {
    let n = g.n();
    (1u32..1 << n)
        .map(|m| members(m, n))
        .filter(|s| s.len() <= n / 2)
        .map(|s| ratio(naive_gamma(g, &s), s.len()))
        .min()
        .unwrap()
}

fn brute_edge(g: &Graph) -> Rational {
    let n = g.n();
    (1u32..(1 << n) - 1)
        .map(|m| members(m, n))
        .map(|s| ratio(naive_cut(g, &s), s.len().min(n - s.len())))
        .min()
        .unwrap()
}

/// Fewest nodes of a connected node set containing all terminals.
fn brute_steiner(g: &Graph, terms: &[usize]) -> usize {
    let n = g.n();
    (1u32..1 << n)
        .map(|m| members(m, n))
        .filter(|s| terms.iter().all(|t| s.contains(t)) && naive_connected(g, s))
        .map(|s| s.len())
        .min()
        .unwrap()
}

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut i = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[i] {
                        edges.push((u, v));
                    }
                    i += 1;
                }
            }
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

fn connected_graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    graph_strategy(max_n).prop_filter("connected", |g| g.is_connected())
}

#[test]
fn expansion_fixtures_match_enumeration() {
    for g in [
        cycle(8).unwrap(),
        complete(4).unwrap(),
        mesh(&[4, 4]).unwrap(),
        hypercube(3).unwrap(),
        path(9).unwrap(),
    ] {
        assert_eq!(node_expansion_exact(&g).unwrap().value, brute_node(&g));
        assert_eq!(edge_expansion_exact(&g).unwrap().value, brute_edge(&g));
    }
    assert_eq!(node_expansion_exact(&cycle(8).unwrap()).unwrap().value, ratio(1, 2));
    assert_eq!(edge_expansion_exact(&cycle(8).unwrap()).unwrap().value, ratio(1, 2));
    assert_eq!(
        edge_expansion_exact(&mesh(&[4, 4]).unwrap()).unwrap().value,
        ratio(1, 2)
    );
}

#[test]
fn subdivided_expansion_within_bound() {
    for k in [2, 4] {
        let h = subdivide_edges(&complete(4).unwrap(), k).unwrap();
        assert!(node_expansion_exact(&h.graph).unwrap().value <= ratio(2, k));
    }
}

#[test]
fn steiner_fixtures_match_enumeration() {
    let m = mesh(&[3, 3]).unwrap();
    for terms in [vec![1, 3, 5, 7], vec![0, 8], vec![0, 2, 6, 8], vec![4]] {
        let t = steiner_tree_min(&m, &NodeSet::from(terms.clone())).unwrap();
        assert_eq!(t.node_count, brute_steiner(&m, &terms), "{terms:?}");
    }
}

#[test]
fn mesh_spans_stay_below_two() {
    for dims in [[3usize, 3].as_slice(), &[2, 2, 2], &[2, 4]] {
        let r = span_exact(&mesh(dims).unwrap(), &Limits::default()).unwrap();
        assert!(r.sigma <= ratio(2, 1), "{dims:?}");
        assert!(r.sigma >= ratio(1, 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn exact_values_match_enumeration(g in graph_strategy(10)) {
        let node = node_expansion_exact(&g).unwrap();
        prop_assert_eq!(node.value, brute_node(&g));
        prop_assert_eq!(node.witness.node_ratio, node.value);
        prop_assert!(node.witness.set.len() <= g.n() / 2);
        let edge = edge_expansion_exact(&g).unwrap();
        prop_assert_eq!(edge.value, brute_edge(&g));
        prop_assert_eq!(edge.witness.edge_ratio, edge.value);
    }

    #[test]
    fn alternative_exact_routes_agree(g in graph_strategy(12)) {
        let forced = Limits { exact_nodes: 0, ..Limits::default() };
        prop_assert_eq!(node_expansion_exact(&g).unwrap(), node_expansion_exact_with(&g, &forced).unwrap());
        let sweep = edge_expansion_exact(&g).unwrap();
        let conn = edge_expansion_connected(&g, &Limits::default()).unwrap();
        prop_assert_eq!(sweep.value, conn.value);
        prop_assert!(induces_connected(&g, &conn.witness.set).unwrap());
    }

    #[test]
    fn heuristics_bound_from_above(g in graph_strategy(12), seed in 0u64..1000) {
        let node = node_expansion_heuristic(&g, 8, seed).unwrap();
        prop_assert!(node.value >= node_expansion_exact(&g).unwrap().value);
        prop_assert_eq!(node.witness.node_ratio, node.value);
        let edge = edge_expansion_heuristic(&g, 8, seed).unwrap();
        prop_assert!(edge.value >= edge_expansion_exact(&g).unwrap().value);
    }

    #[test]
    fn boundaries_match_definitions(g in graph_strategy(10), mask in any::<u32>()) {
        let s = members(mask & ((1 << g.n()) - 1), g.n());
        let set = NodeSet::from(s.clone());
        prop_assert_eq!(node_boundary(&g, &set).unwrap().len(), naive_gamma(&g, &s));
        let eb = edge_boundary(&g, &set).unwrap();
        prop_assert_eq!(eb.len(), naive_cut(&g, &s));
        // every boundary edge ends at a boundary node, and each boundary
        // node carries at least one boundary edge
        prop_assert!(node_boundary(&g, &set).unwrap().len() <= eb.len());
        prop_assert_eq!(induces_connected(&g, &set).unwrap(), naive_connected(&g, &s));
        if !s.is_empty() && s.len() < g.n() {
            prop_assert_eq!(is_compact(&g, &set).unwrap(), is_compact(&g, &set.complement(g.n())).unwrap());
        }
    }

    #[test]
    fn removal_composes(g in graph_strategy(10), a in any::<u32>(), b in any::<u32>()) {
        let n = g.n();
        let sa = NodeSet::from(members(a & ((1 << n) - 1), n));
        let once = remove_nodes(&g, &sa).unwrap();
        let sb = NodeSet::from(members(b & ((1 << once.n()) - 1), once.n()));
        let twice = remove_nodes(&once, &sb).unwrap();
        let direct = remove_nodes(&g, &sa.union(&once.to_labels(&sb))).unwrap();
        prop_assert_eq!(twice, direct);
    }

    #[test]
    fn sparse_node_cut_exists_iff_enumeration_finds_one(
        g in graph_strategy(9), an in 1i64..4, ad in 1i64..4, en in 1i64..4, ed in 1i64..4,
    ) {
        let alpha = Rational::new(an, ad);
        let eps = Rational::new(en.min(ed), ed);
        let n = g.n();
        let exists = (1u32..1 << n)
            .map(|m| members(m, n))
            .any(|s| s.len() <= n / 2 && le_scaled(naive_gamma(&g, &s), alpha, eps, s.len()));
        let found = find_sparse_node_cut(&g, alpha, eps, &Search::exact()).unwrap();
        prop_assert_eq!(found.is_some(), exists);
        if let Some(c) = found {
            prop_assert!(le_scaled(c.node_boundary.len(), alpha, eps, c.set.len()));
        }
        let edge_exists = (1u32..1 << n)
            .map(|m| members(m, n))
            .any(|s| s.len() <= n / 2 && naive_connected(&g, &s) && le_scaled(naive_cut(&g, &s), alpha, eps, s.len()));
        let edge_found = find_sparse_edge_cut(&g, alpha, eps, &Search::exact()).unwrap();
        prop_assert_eq!(edge_found.is_some(), edge_exists);
    }

    #[test]
    fn steiner_matches_enumeration(g in connected_graph_strategy(9), mask in any::<u32>()) {
        let n = g.n();
        let mut terms = members(mask & ((1 << n) - 1), n);
        if terms.is_empty() {
            terms.push(0);
        }
        let t = steiner_tree_min(&g, &NodeSet::from(terms.clone())).unwrap();
        prop_assert_eq!(t.node_count, brute_steiner(&g, &terms));
        prop_assert!(t.node_count >= terms.len());
        prop_assert_eq!(t.edges.len() + 1, t.node_count);
        let nodes = if t.edges.is_empty() { NodeSet::from(terms.clone()) } else { t.nodes() };
        prop_assert!(terms.iter().all(|&v| nodes.contains(v)));
        prop_assert!(t.edges.iter().all(|&(u, v)| g.has_edge(u, v)));
    }

    #[test]
    fn span_invariant_under_relabelling(g in connected_graph_strategy(8), perm_seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let n = g.n();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
        let edges: Vec<_> = g.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        let h = Graph::from_edges(n, &edges).unwrap();
        let a = span_exact(&g, &Limits::default()).unwrap();
        let b = span_exact(&h, &Limits::default()).unwrap();
        prop_assert_eq!(a.sigma, b.sigma);
        prop_assert!(a.sigma >= ratio(1, 1));
        prop_assert_eq!(a.steiner_node_count, a.steiner_tree.len() + 1);
    }
}
