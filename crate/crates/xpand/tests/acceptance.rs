//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Values are re-derived here with brute-force bitmask
//! oracles that share no code with the library's search routines.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xpand::experiments::{
    adversary_exhaustive, gamma, max_admissible_faults, run_percolation_sweep, summarize, trial_seed,
    verify_subgraph_count_bound, FaultModel,
};
use xpand::suites::{random_connected_graph, random_connected_set};
use xpand_core::expansion::{node_expansion_exact, Search};
use xpand_core::faults::{apply_faults, attack_chain_centers, random_edge_survival, FaultPattern};
use xpand_core::generators::{complete, cycle, hypercube, mesh, random_regular, subdivide_edges, SubdividedGraph};
use xpand_core::graph::node_boundary;
use xpand_core::pruning::{compactify, prune, prune2, union_boundary_check, PruneTrace};
use xpand_core::span::{enumerate_compact_sets, mesh_span_certificate, sample_compact_set, span_exact};
use xpand_core::{Graph, Limits, NodeSet, Rational};

// ---------------------------------------------------------------- oracles

/// Adjacency bitmasks of a graph with at most 32 nodes.
struct Masks {
    n: usize,
    adj: Vec<u32>,
}

impl Masks {
    fn of(g: &Graph) -> Masks {
        assert!(g.n() <= 32);
        let adj = (0..g.n())
            .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
            .collect();
        Masks { n: g.n(), adj }
    }

    fn full(&self) -> u32 {
        if self.n == 32 {
            u32::MAX
        } else {
            (1u32 << self.n) - 1
        }
    }

    fn gamma(&self, s: u32) -> u32 {
        let mut acc = 0;
        let mut rest = s;
        while rest != 0 {
            acc |= self.adj[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        acc & !s
    }

    fn cut(&self, s: u32) -> u32 {
        let mut c = 0;
        let mut rest = s;
        while rest != 0 {
            c += (self.adj[rest.trailing_zeros() as usize] & !s).count_ones();
            rest &= rest - 1;
        }
        c
    }

    fn connected(&self, s: u32) -> bool {
        if s == 0 {
            return false;
        }
        let mut reach = s & s.wrapping_neg();
        loop {
            let next = (reach | self.gamma(reach)) & s;
            if next == reach {
                return reach == s;
            }
            reach = next;
        }
    }

    fn compact(&self, s: u32) -> bool {
        s != 0 && s != self.full() && self.connected(s) && self.connected(self.full() & !s)
    }

    /// Minimum of |Γ(U)|/|U| over 1 <= |U| <= n/2.
    fn node_expansion(&self) -> Rational {
        let half = self.n as u32 / 2;
        let mut best: Option<(u32, u32)> = None;
        for s in 1..=self.full() {
            let size = s.count_ones();
            if size > half {
                continue;
            }
            let b = self.gamma(s).count_ones();
            if best.is_none_or(|(bn, bd)| (b as u64) * (bd as u64) < (bn as u64) * (size as u64)) {
                best = Some((b, size));
            }
        }
        let (b, s) = best.expect("at least two nodes");
        Rational::new(b as i64, s as i64)
    }

    /// Minimum of e(U)/min(|U|, n-|U|) over nonempty proper U.
    fn edge_expansion(&self) -> Rational {
        let n = self.n as u32;
        let mut best: Option<(u32, u32)> = None;
        for s in 1..self.full() {
            let size = s.count_ones().min(n - s.count_ones());
            let c = self.cut(s);
            if best.is_none_or(|(bn, bd)| (c as u64) * (bd as u64) < (bn as u64) * (size as u64)) {
                best = Some((c, size));
            }
        }
        let (c, s) = best.expect("at least two nodes");
        Rational::new(c as i64, s as i64)
    }
}

fn to_mask(s: &NodeSet) -> u32 {
    s.iter().fold(0, |m, v| m | 1 << v)
}

fn largest_component(g: &Graph) -> usize {
    let mut seen = vec![false; g.n()];
    let mut best = 0;
    for s in 0..g.n() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        best = best.max(size);
    }
    best
}

fn subsets(n: usize, f: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, from: usize) {
    if cur.len() == f {
        out.push(cur.clone());
        return;
    }
    for v in from..n {
        cur.push(v);
        subsets(n, f, out, cur, v + 1);
        cur.pop();
    }
}

fn first_connected_regular(n: usize, d: usize, count: usize) -> Vec<(u64, Graph)> {
    (1u64..)
        .filter_map(|s| random_regular(n, d, s).ok().map(|g| (s, g)))
        .filter(|(_, g)| g.is_connected())
        .take(count)
        .collect()
}

// ---------------------------------------------------------------- harness

type Outcome = Result<String, String>;

struct Suite {
    failed: usize,
}

impl Suite {
    fn run(&mut self, id: &str, name: &str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                self.failed += 1;
                println!("FAIL {id:>2} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Union checks across criteria 1 and 2, reported by criterion 4.
#[derive(Default)]
struct UnionTally {
    traces: usize,
    failures: usize,
}

impl UnionTally {
    fn record(&mut self, t: &PruneTrace, g_f: &Graph) {
        self.traces += 1;
        if !union_boundary_check(t, g_f).unwrap_or(false) {
            self.failures += 1;
        }
    }
}

// ---------------------------------------------------------------- criteria

fn theorem_instances() -> Vec<(String, Graph)> {
    let mut v = vec![
        ("mesh 4x4".to_string(), mesh(&[4, 4]).unwrap()),
        ("cycle 12".to_string(), cycle(12).unwrap()),
        ("hypercube 3".to_string(), hypercube(3).unwrap()),
    ];
    for (s, g) in first_connected_regular(10, 3, 10) {
        v.push((format!("3-regular n=10 seed {s}"), g));
    }
    v
}

fn adversary_criterion(unions: &mut UnionTally) -> Outcome {
    let mut runs = 0usize;
    for (name, g) in theorem_instances() {
        let n = g.n();
        let m = Masks::of(&g);
        let alpha = m.node_expansion();
        let lib = node_expansion_exact(&g).map_err(|e| e.to_string())?.value;
        ensure(lib == alpha, || {
            format!("{name}: library alpha {lib} vs oracle {alpha}")
        })?;
        for k in [2usize, 3] {
            let kr = Rational::from_integer(k as i64);
            let eps = Rational::from_integer(1) - Rational::from_integer(1) / kr;
            let admissible = |f: usize| kr * Rational::from_integer(f as i64) / alpha <= Rational::new(n as i64, 4);
            let f_max = (0..=n).take_while(|&f| admissible(f)).last().unwrap();
            ensure(f_max == max_admissible_faults(n, alpha, k), || {
                format!("{name}: admissible count")
            })?;
            for f in 0..=f_max {
                let mut sets = Vec::new();
                subsets(n, f, &mut sets, &mut Vec::new(), 0);
                ensure(sets.len() <= 1_000_000, || format!("{name}: too many fault sets"))?;
                let size_bound = Rational::from_integer(n as i64) - kr * Rational::from_integer(f as i64) / alpha;
                for faults in &sets {
                    let g_f = apply_faults(&g, &FaultPattern::nodes(n, NodeSet::from(faults.clone()))).unwrap();
                    let t = prune(&g_f, alpha, eps, &Search::exact()).map_err(|e| e.to_string())?;
                    unions.record(&t, &g_f);
                    runs += 1;
                    let h = g.induced(&t.survivor).unwrap();
                    ensure(Rational::from_integer(h.n() as i64) >= size_bound, || {
                        format!("{name} k={k} faults {faults:?}: |H|={} < {size_bound}", h.n())
                    })?;
                    if h.n() >= 2 {
                        let hv = Masks::of(&h).node_expansion();
                        ensure(hv >= eps * alpha, || {
                            format!("{name} k={k} faults {faults:?}: expansion {hv} < {}", eps * alpha)
                        })?;
                    }
                }
                let report =
                    adversary_exhaustive(&g, f, k, 1_000_000, &Limits::default()).map_err(|e| e.to_string())?;
                ensure(report.ok() && report.fault_sets == sets.len() as u64, || {
                    format!("{name} k={k} f={f}: library report {report:?}")
                })?;
            }
        }
    }
    Ok(format!("13 graphs, k in {{2,3}}, {runs} fault sets, all bounds hold"))
}

const EPS_CHOICES: [(i64, i64); 5] = [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4)];

fn loop_exit_criterion(unions: &mut UnionTally) -> Outcome {
    let mut culled = 0;
    for i in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0000 + i);
        let g = random_connected_graph(&mut rng, 2, 16);
        let n = g.n();
        let p = rng.gen_range(0.0..0.4);
        let failed: NodeSet = (0..n).filter(|_| rng.gen_bool(p)).collect();
        let (a, b) = EPS_CHOICES[rng.gen_range(0..EPS_CHOICES.len())];
        let eps = Rational::new(a, b);
        let m = Masks::of(&g);
        let (alpha, alpha_e) = (m.node_expansion(), m.edge_expansion());
        let g_f = apply_faults(&g, &FaultPattern::nodes(n, failed.clone())).unwrap();

        let t = prune(&g_f, alpha, eps, &Search::exact()).map_err(|e| e.to_string())?;
        unions.record(&t, &g_f);
        culled += t.steps.len();
        let h = g.induced(&t.survivor).unwrap();
        if h.n() >= 2 {
            let hv = Masks::of(&h).node_expansion();
            ensure(hv > alpha * eps, || {
                format!("instance {i}: prune left expansion {hv} <= {}", alpha * eps)
            })?;
        }

        let t2 = prune2(&g_f, alpha_e, eps, &Search::exact()).map_err(|e| e.to_string())?;
        culled += t2.steps.len();
        let h2 = g.induced(&t2.survivor).unwrap();
        if h2.n() >= 2 {
            let hv = Masks::of(&h2).edge_expansion();
            ensure(hv > alpha_e * eps, || {
                format!("instance {i}: prune2 left edge expansion {hv} <= {}", alpha_e * eps)
            })?;
        }
    }
    Ok(format!(
        "500 instances, {culled} culling steps, both exit conditions hold"
    ))
}

fn compact_criterion() -> Outcome {
    let mut changed = 0;
    for i in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xc0de_0000 + i);
        let g = random_connected_graph(&mut rng, 3, 16);
        let size = rng.gen_range(1..=(g.n() - 1) / 2);
        let s = random_connected_set(&mut rng, &g, size);
        let m = Masks::of(&g);
        let sm = to_mask(&s);
        ensure(m.connected(sm) && 2 * s.len() < g.n(), || {
            format!("instance {i}: bad input set")
        })?;
        let k = compactify(&g, &s).map_err(|e| e.to_string())?;
        let km = to_mask(&k);
        ensure(m.compact(km), || format!("instance {i}: {k:?} is not compact"))?;
        let n = g.n() as u64;
        let ratio = |x: u32| (m.cut(x) as u64, (x.count_ones() as u64).min(n - x.count_ones() as u64));
        let ((kc, kd), (sc, sd)) = (ratio(km), ratio(sm));
        ensure(kc * sd <= sc * kd, || {
            format!("instance {i}: ratio {kc}/{kd} above {sc}/{sd}")
        })?;
        if km != sm {
            changed += 1;
        }
    }
    Ok(format!(
        "1000 instances, {changed} sets changed, all compact with no larger ratio"
    ))
}

/// Checks an explicit edge list: real edges, connected, covering `terminals`.
fn check_tree(g: &Graph, terminals: &NodeSet, edges: &[(usize, usize)]) -> Result<usize, String> {
    let mut nodes: Vec<usize> = edges
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .chain(terminals.iter())
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    ensure(edges.iter().all(|&(a, b)| g.has_edge(a, b)), || {
        "tree uses a non-edge".into()
    })?;
    let sub = Graph::from_edges(g.n(), edges).map_err(|e| e.to_string())?;
    let m = Masks::of(&sub);
    let mask = nodes.iter().fold(0u32, |acc, &v| acc | 1 << v);
    ensure(nodes.len() == 1 || m.connected(mask), || "tree is disconnected".into())?;
    Ok(nodes.len())
}

/// Compact sets by direct enumeration, in mask order.
fn compact_masks(m: &Masks) -> Vec<u32> {
    (1..m.full()).filter(|&s| m.compact(s)).collect()
}

/// Exact span by enumeration: max over compact U of (fewest nodes of a
/// connected set containing Γ(U)) / |Γ(U)|.
fn brute_span(m: &Masks) -> Rational {
    let mut connected: Vec<u32> = (1..=m.full()).filter(|&s| m.connected(s)).collect();
    connected.sort_by_key(|s| s.count_ones());
    compact_masks(m)
        .into_iter()
        .map(|u| {
            let b = m.gamma(u);
            let t = connected.iter().find(|&&c| c & b == b).unwrap().count_ones();
            Rational::new(t as i64, b.count_ones() as i64)
        })
        .max()
        .unwrap()
}

fn certificate_ok(dims: &[usize], g: &Graph, u: &NodeSet) -> Result<(), String> {
    let cert = mesh_span_certificate(dims, u).map_err(|e| e.to_string())?;
    let b = node_boundary(g, u).unwrap();
    ensure(cert.ok, || format!("{u:?}: certificate rejected"))?;
    ensure(cert.boundary == b, || format!("{u:?}: wrong boundary"))?;
    ensure(cert.tree_edges.len() <= 2 * (b.len() - 1), || {
        format!("{u:?}: too many tree edges")
    })?;
    let nodes = check_tree(g, &b, &cert.tree_edges).map_err(|e| format!("{u:?}: {e}"))?;
    ensure(nodes < 2 * b.len(), || {
        format!("{u:?}: {nodes} tree nodes for {} boundary nodes", b.len())
    })
}

fn mesh_span_criterion() -> Outcome {
    let lim = Limits::default();
    let mut detail = Vec::new();
    for dims in [vec![3, 3], vec![4, 4], vec![2, 2, 2], vec![3, 3, 2]] {
        let g = mesh(&dims).unwrap();
        let r = span_exact(&g, &lim).map_err(|e| e.to_string())?;
        let label = dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
        ensure(r.sigma <= Rational::from_integer(2), || {
            format!("{label}: span {}", r.sigma)
        })?;
        let nodes = check_tree(&g, &r.boundary, &r.steiner_tree)?;
        ensure(nodes == r.steiner_node_count, || format!("{label}: reported tree size"))?;
        ensure(Rational::new(nodes as i64, r.boundary.len() as i64) == r.sigma, || {
            format!("{label}: ratio")
        })?;
        if g.n() <= 16 {
            let oracle = brute_span(&Masks::of(&g));
            ensure(oracle == r.sigma, || {
                format!("{label}: span {} vs enumeration {oracle}", r.sigma)
            })?;
        }
        detail.push(format!("{label}={}", r.sigma));
    }

    let g = mesh(&[4, 4]).unwrap();
    let m = Masks::of(&g);
    let all = compact_masks(&m);
    let lib = enumerate_compact_sets(&g, &lim).map_err(|e| e.to_string())?;
    ensure(all.len() == lib.len(), || {
        format!("4x4: {} compact sets vs library {}", all.len(), lib.len())
    })?;
    for &u in &all {
        certificate_ok(&[4, 4], &g, &NodeSet::from_mask(u as u64))?;
    }
    for (dims, seed) in [(vec![5, 5], 55u64), (vec![3, 3, 3], 333)] {
        let g = mesh(&dims).unwrap();
        let m = Masks::of(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut count = 0;
        while count < 500 {
            let Some(u) = sample_compact_set(&g, &mut rng) else {
                continue;
            };
            ensure(m.compact(to_mask(&u)), || format!("sampled {u:?} is not compact"))?;
            certificate_ok(&dims, &g, &u)?;
            count += 1;
        }
    }
    Ok(format!(
        "spans {}; {} certificates on 4x4, 500 each on 5x5 and 3x3x3",
        detail.join(" "),
        all.len()
    ))
}

fn subdivided_expansion_criterion() -> Outcome {
    let (seed, rr) = first_connected_regular(8, 3, 1).remove(0);
    let mut detail = Vec::new();
    for (name, base) in [
        ("K4".to_string(), complete(4).unwrap()),
        (format!("3-regular n=8 seed {seed}"), rr),
    ] {
        for k in [2usize, 4] {
            let h = subdivide_edges(&base, k).unwrap().graph;
            let r = node_expansion_exact(&h).map_err(|e| e.to_string())?;
            let bound = Rational::new(2, k as i64);
            ensure(r.value <= bound, || format!("{name} k={k}: {} > {bound}", r.value))?;
            // The witness is re-scored directly, so the bound does not rest
            // on the search alone.
            let w = &r.witness.set;
            let gw = node_boundary(&h, w).unwrap();
            ensure(2 * w.len() <= h.n(), || format!("{name} k={k}: witness too large"))?;
            ensure(Rational::new(gw.len() as i64, w.len() as i64) == r.value, || {
                format!("{name} k={k}: witness")
            })?;
            if h.n() <= 24 {
                let oracle = Masks::of(&h).node_expansion();
                ensure(oracle == r.value, || {
                    format!("{name} k={k}: {} vs enumeration {oracle}", r.value)
                })?;
            }
            detail.push(format!("{name} k={k}: {}", r.value));
        }
    }
    Ok(detail.join(", "))
}

fn chain_attack_criterion() -> Outcome {
    let mut detail = Vec::new();
    for k in [2usize, 4] {
        let h: SubdividedGraph = subdivide_edges(&complete(4).unwrap(), k).unwrap();
        let delta = h.base_max_degree();
        let pattern = attack_chain_centers(&h).map_err(|e| e.to_string())?;
        let failed = pattern.failed().unwrap();
        ensure(failed.len() == h.chains.len(), || "one fault per chain".into())?;
        ensure(
            h.chains
                .iter()
                .all(|c| c.nodes.iter().filter(|v| failed.contains(**v)).count() == 1),
            || "every chain loses exactly one node".into(),
        )?;
        let largest = largest_component(&apply_faults(&h.graph, &pattern).unwrap());
        let bound = delta * k / 2 + 1;
        ensure(largest <= bound, || format!("k={k}: component of {largest} > {bound}"))?;
        detail.push(format!("k={k}: largest {largest} <= {bound}"));
    }
    Ok(detail.join(", "))
}

fn census_criterion() -> Outcome {
    let h = subdivide_edges(&complete(4).unwrap(), 2).unwrap();
    let rows = verify_subgraph_count_bound(&h, 3, u64::MAX).map_err(|e| e.to_string())?;
    let m = Masks::of(&h.graph);
    let base = to_mask(&h.base_nodes);
    let mut raw = [0u64; 4];
    let mut sets: [Vec<u32>; 4] = Default::default();
    for s in 1..=m.full() {
        let r = (s & base).count_ones() as usize;
        if (1..=3).contains(&r) && m.connected(s) {
            raw[r] += 1;
            sets[r].push(s & base);
        }
    }
    let n = h.base_nodes.len() as u128;
    let delta = h.base_max_degree() as u128;
    let mut detail = Vec::new();
    for row in &rows {
        let r = row.r;
        sets[r].sort_unstable();
        sets[r].dedup();
        let bound = n * delta.pow(2 * r as u32);
        ensure(
            row.raw_count == raw[r] && row.base_sets == sets[r].len() as u64 && row.bound == bound,
            || {
                format!(
                    "r={r}: library row {row:?} vs enumeration raw {} sets {}",
                    raw[r],
                    sets[r].len()
                )
            },
        )?;
        ensure(row.ok && (sets[r].len() as u128) <= bound, || {
            format!("r={r}: {} > {bound}", sets[r].len())
        })?;
        detail.push(format!("r={r}: {} <= {bound} (raw {})", row.base_sets, row.raw_count));
    }
    Ok(detail.join(", "))
}

fn percolation_criterion() -> Outcome {
    let g = mesh(&[40, 40]).unwrap();
    let grid = [0.35, 0.65];
    let a = run_percolation_sweep(&g, FaultModel::Edge, &grid, 30, 9).map_err(|e| e.to_string())?;
    let b = run_percolation_sweep(&g, FaultModel::Edge, &grid, 30, 9).map_err(|e| e.to_string())?;
    let bits = |v: &[xpand::experiments::TrialResult]| v.iter().map(|r| r.gamma.to_bits()).collect::<Vec<_>>();
    ensure(bits(&a) == bits(&b), || "re-run differs".into())?;
    for r in a.iter().filter(|r| r.trial < 3) {
        let point = grid.iter().position(|&p| p == r.p).unwrap();
        let kept = random_edge_survival(&g, r.p, trial_seed(9, point, r.trial)).unwrap();
        let direct = largest_component(&kept) as f64 / g.n() as f64;
        ensure(direct == r.gamma && gamma(&kept) == direct, || {
            format!("trial {} at p={}: gamma", r.trial, r.p)
        })?;
    }
    let s = summarize(&a);
    let diff = s[1].mean_gamma - s[0].mean_gamma;
    ensure(diff >= 0.3, || {
        format!(
            "mean gamma {:.4} -> {:.4}, gap {diff:.4}",
            s[0].mean_gamma, s[1].mean_gamma
        )
    })?;
    Ok(format!(
        "mean gamma {:.4} at 0.35, {:.4} at 0.65, gap {diff:.4}; re-run bit-identical",
        s[0].mean_gamma, s[1].mean_gamma
    ))
}

fn disintegration_criterion() -> Outcome {
    let (seed, base) = first_connected_regular(20, 3, 1).remove(0);
    let h = subdivide_edges(&base, 6).unwrap();
    let p = 4.0 * 3f64.ln() / 6.0;
    let r = run_percolation_sweep(&h.graph, FaultModel::Node, &[p / 4.0, p], 50, 10).map_err(|e| e.to_string())?;
    let s = summarize(&r);
    let (lo, hi) = (s[0].mean_gamma, s[1].mean_gamma);
    ensure(hi <= 0.5 * lo, || {
        format!("mean gamma {hi:.4} at p={p:.4} vs {lo:.4} at p/4")
    })?;
    Ok(format!(
        "base seed {seed}: mean gamma {lo:.4} at p/4, {hi:.4} at p={p:.4} (ratio {:.3})",
        hi / lo
    ))
}

// ---------------------------------------------------------------- replay

struct Cli {
    exe: PathBuf,
    dir: PathBuf,
    runs: Vec<PathBuf>,
}

impl Cli {
    fn path(&self, name: &str) -> String {
        self.dir.join(name).display().to_string()
    }

    fn call(&self, args: &[String]) -> Result<(), String> {
        let out = Process::new(&self.exe)
            .args(args)
            .current_dir(&self.dir)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.code() == Some(0), || {
            format!(
                "`xpand {}` exited {:?}: {}",
                args.join(" "),
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            )
        })
    }

    /// Runs a subcommand writing to `out`; remembers it for replay.
    fn run(&mut self, out: &str, args: &[&str]) -> Result<(), String> {
        let mut v: Vec<String> = args.iter().map(|a| a.to_string()).collect();
        v.extend(["-o".to_string(), self.path(out)]);
        self.call(&v)?;
        self.runs.push(self.dir.join(out));
        Ok(())
    }
}

fn replay_criterion() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cli = Cli {
        exe: PathBuf::from(env!("CARGO_BIN_EXE_xpand")),
        dir: tmp.path().to_path_buf(),
        runs: Vec::new(),
    };
    let p = |c: &Cli, s: &str| c.path(s);

    // 1 and 4: adversary runs (union checks are part of each report).
    let mut graphs = vec![
        ("m44.gr", vec!["gen", "--family", "mesh", "--dims", "4x4"]),
        ("c12.gr", vec!["gen", "--family", "cycle", "--n", "12"]),
        ("q3.gr", vec!["gen", "--family", "hypercube", "--dim", "3"]),
    ];
    let seeds: Vec<String> = first_connected_regular(10, 3, 10)
        .iter()
        .map(|(s, _)| s.to_string())
        .collect();
    let names: Vec<String> = seeds.iter().map(|s| format!("rr10_{s}.gr")).collect();
    for (name, s) in names.iter().zip(&seeds) {
        graphs.push((
            name,
            vec![
                "gen",
                "--family",
                "random-regular",
                "--n",
                "10",
                "--degree",
                "3",
                "--seed",
                s,
            ],
        ));
    }
    for (name, args) in &graphs {
        cli.run(name, args)?;
    }
    for (name, _) in &graphs {
        for k in ["2", "3"] {
            let g = p(&cli, name);
            cli.run(&format!("adv_{name}_{k}.json"), &["adversary", &g, "--k", k])?;
        }
    }
    // 2, 3: randomised suites.
    cli.run("loops.json", &["check-loops", "--instances", "500", "--seed", "2"])?;
    cli.run("compact.json", &["check-compact", "--instances", "1000", "--seed", "3"])?;
    // 5: spans and certificates.
    for dims in ["3x3", "2x2x2", "3x3x2"] {
        cli.run(&format!("mesh{dims}.gr"), &["gen", "--family", "mesh", "--dims", dims])?;
    }
    for g in ["mesh3x3.gr", "m44.gr", "mesh2x2x2.gr", "mesh3x3x2.gr"] {
        let path = p(&cli, g);
        cli.run(&format!("span_{g}.json"), &["span", "--exact", &path])?;
    }
    cli.run("vms44.txt", &["verify-mesh-span", "--dims", "4x4", "--exhaustive"])?;
    cli.run(
        "vms55.txt",
        &["verify-mesh-span", "--dims", "5x5", "--sample", "500", "--seed", "5"],
    )?;
    cli.run(
        "vms333.txt",
        &["verify-mesh-span", "--dims", "3x3x3", "--sample", "500", "--seed", "6"],
    )?;
    // 6, 7, 8: subdivided graphs.
    let rr8 = first_connected_regular(8, 3, 1)[0].0.to_string();
    for k in ["2", "4"] {
        cli.run(
            &format!("k4s{k}.gr"),
            &["gen", "--family", "complete", "--n", "4", "--subdivide", k],
        )?;
        let rr = format!("rr8s{k}.gr");
        cli.run(
            &rr,
            &[
                "gen",
                "--family",
                "random-regular",
                "--n",
                "8",
                "--degree",
                "3",
                "--seed",
                &rr8,
                "--subdivide",
                k,
            ],
        )?;
        for g in [format!("k4s{k}.gr"), rr] {
            let path = p(&cli, &g);
            cli.run(&format!("exp_{g}.json"), &["expansion", "--node", "--exact", &path])?;
        }
        let path = p(&cli, &format!("k4s{k}.gr"));
        cli.run(
            &format!("attack_k4s{k}.json"),
            &["attack", &path, "--strategy", "chain-centers"],
        )?;
    }
    let path = p(&cli, "k4s2.gr");
    cli.run("census.json", &["census", &path, "--r-max", "3"])?;
    // 9, 10: sweeps.
    cli.run("m40.gr", &["gen", "--family", "mesh", "--dims", "40x40"])?;
    let path = p(&cli, "m40.gr");
    cli.run(
        "perc.csv",
        &[
            "percolate",
            &path,
            "--model",
            "edge",
            "--p-grid",
            "0.35,0.65",
            "--trials",
            "30",
            "--seed",
            "9",
        ],
    )?;
    let rr20 = first_connected_regular(20, 3, 1)[0].0.to_string();
    cli.run(
        "rr20s6.gr",
        &[
            "gen",
            "--family",
            "random-regular",
            "--n",
            "20",
            "--degree",
            "3",
            "--seed",
            &rr20,
            "--subdivide",
            "6",
        ],
    )?;
    let ph = 4.0 * 3f64.ln() / 6.0;
    let grid = format!("{},{}", ph / 4.0, ph);
    let path = p(&cli, "rr20s6.gr");
    cli.run(
        "disint.csv",
        &[
            "percolate",
            &path,
            "--model",
            "node",
            "--p-grid",
            &grid,
            "--trials",
            "50",
            "--seed",
            "10",
            "--summary",
        ],
    )?;

    let runs = std::mem::take(&mut cli.runs);
    for out in &runs {
        let manifest = format!("{}.manifest.json", out.display());
        let again = format!("{}.replay", out.display());
        cli.call(&["--replay".into(), manifest, "-o".into(), again.clone()])?;
        let (a, b) = (std::fs::read(out).unwrap(), std::fs::read(Path::new(&again)).unwrap());
        ensure(a == b, || format!("{} differs on replay", out.display()))?;
    }
    Ok(format!("{} recorded runs replayed byte for byte", runs.len()))
}

fn main() {
    let mut suite = Suite { failed: 0 };
    let mut unions = UnionTally::default();
    suite.run("1", "adversarial faults, exhaustive", || {
        adversary_criterion(&mut unions)
    });
    suite.run("2", "pruning exit conditions", || loop_exit_criterion(&mut unions));
    suite.run("3", "compactify property", compact_criterion);
    suite.run("4", "union boundary check on all traces", || {
        ensure(unions.traces > 0 && unions.failures == 0, || {
            format!("{} of {} traces failed", unions.failures, unions.traces)
        })?;
        Ok(format!("{} traces", unions.traces))
    });
    suite.run("5", "mesh span and certificates", mesh_span_criterion);
    suite.run(
        "6",
        "subdivided expander expansion <= 2/k",
        subdivided_expansion_criterion,
    );
    suite.run("7", "chain-centre attack shatters", chain_attack_criterion);
    suite.run("8", "connected subgraph census", census_criterion);
    suite.run("9", "percolation bracket on 40x40 mesh", percolation_criterion);
    suite.run("10", "disintegration trend", disintegration_criterion);
    suite.run("11", "manifest replay", replay_criterion);
    if suite.failed > 0 {
        println!("{} criteria failed", suite.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
