/// Size limits for the exhaustive searches.
///
/// Every exact routine checks its input against one of these and returns
/// [`Error::LimitExceeded`](crate::Error::LimitExceeded) instead of running
/// for an unbounded time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest graph for the full `2^n` subset sweep.
    pub exact_nodes: usize,
    /// Number of candidate boundary sets the boundary-enumeration search
    /// (used for node expansion of graphs above `exact_nodes`, up to 64
    /// nodes) may examine.
    pub boundary_budget: u64,
    /// Largest graph for connected-subset enumeration.
    pub connected_nodes: usize,
    /// Maximum number of connected subsets visited in one enumeration.
    pub connected_cap: u64,
    /// Largest terminal set for the Steiner tree dynamic program.
    pub steiner_terminals: usize,
    /// Largest graph for exhaustive compact-set enumeration.
    pub compact_nodes: usize,
    /// Largest graph the generators will build.
    pub max_nodes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            exact_nodes: 24,
            boundary_budget: 50_000_000,
            connected_nodes: 40,
            connected_cap: 20_000_000,
            steiner_terminals: 14,
            compact_nodes: 18,
            max_nodes: 1 << 24,
        }
    }
}
