//! Expansion of faulty networks.
//!
//! This crate holds the pure algorithmic part of `xpand`: an immutable graph
//! type with boundary primitives, exact and heuristic expansion search, the
//! two pruning loops that extract a large well-expanding subnetwork from a
//! faulty graph, the span parameter (minimum Steiner trees over boundaries of
//! compact sets), graph generators and fault patterns.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, experiments and
//! the command-line tool live in the `xpand` crate.
//!
//! All cut decisions are made with exact integer/rational arithmetic; ties are
//! broken by (smaller set, then lexicographically smaller sorted id list) so
//! that every result is reproducible.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod bits;
pub mod error;
pub mod expansion;
pub mod faults;
pub mod generators;
pub mod graph;
pub mod limits;
pub mod pruning;
pub mod rational;
pub mod span;

pub use error::{Error, Result};
pub use graph::{Cut, Graph, NodeSet};
pub use limits::Limits;
pub use rational::Rational;
