//! Exact small-instance toolkit for influence maximization under the
//! independent cascade model with full-adoption feedback.
//!
//! The crate provides:
//!
//! - directed influence graphs with per-edge activation probabilities,
//!   classification (arborescences, one-directional bipartite, alpha-bounded)
//!   and deterministic generators ([`graph`]);
//! - live-edge sampling, exhaustive live-edge enumeration, exact and
//!   Monte Carlo spread ([`diffusion`]);
//! - realizations, partial realizations, posteriors and marginal gains
//!   ([`realization`]);
//! - adaptive and non-adaptive policies with exact optimal oracles
//!   ([`policies`]);
//! - adaptivity-gap bounds and an inequality verification harness
//!   ([`gaps`], [`harness`]).
//!
//! Everything is sized for exhaustive verification on small instances:
//! graphs are capped at 64 nodes and 64 edges, exact operations enumerate
//! all 2^m live-edge graphs and are additionally capped by [`Caps`].

pub mod diffusion;
pub mod error;
pub mod gaps;
pub mod graph;
pub mod harness;
pub mod policies;
pub mod realization;
pub mod sets;

pub use error::{Error, Result};
pub use graph::InfluenceGraph;
pub use sets::{EdgeSet, NodeId, NodeSet};

/// Resource limits for exact operations.
///
/// `max_edges` caps exhaustive live-edge enumeration at `2^max_edges`
/// realizations; `max_combinations` caps subset searches such as the
/// non-adaptive oracle's candidate scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_edges: u32,
    pub max_combinations: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_edges: 20,
            max_combinations: 2_000_000,
        }
    }
}

impl Caps {
    pub fn with_max_edges(max_edges: u32) -> Self {
        Caps {
            max_edges,
            ..Caps::default()
        }
    }
}

/// Relative-tolerance strict comparison used for deterministic argmax
/// tie-breaking: `a` counts as an improvement over `b` only if it exceeds
/// `b` by more than a 1e-9 relative margin. Candidates are scanned in
/// ascending node order, so ties resolve to the smallest node id.
pub(crate) fn improves(a: f64, b: f64) -> bool {
    a > b + 1e-9 * b.abs().max(1.0)
}
