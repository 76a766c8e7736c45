//! Compact bitmask sets for node and edge subsets.
//!
//! Graphs are capped at 64 nodes and 64 edges, so both set types fit in a
//! single `u64`. `NodeSet` serializes as a sorted list of node ids to keep
//! JSON reports readable and stable.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type NodeId = u32;

pub const MAX_NODES: u32 = 64;
pub const MAX_EDGES: u32 = 64;

/// Set of node ids in `0..64`, backed by a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn singleton(v: NodeId) -> NodeSet {
        debug_assert!(v < MAX_NODES);
        NodeSet(1 << v)
    }

    /// All nodes `0..n`.
    pub fn full(n: u32) -> NodeSet {
        debug_assert!(n <= MAX_NODES);
        if n == MAX_NODES {
            NodeSet(u64::MAX)
        } else {
            NodeSet((1u64 << n) - 1)
        }
    }

    pub fn from_ids(ids: &[NodeId]) -> NodeSet {
        ids.iter().copied().collect()
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn from_bits(bits: u64) -> NodeSet {
        NodeSet(bits)
    }

    pub fn contains(self, v: NodeId) -> bool {
        v < MAX_NODES && self.0 & (1 << v) != 0
    }

    #[must_use]
    pub fn insert(self, v: NodeId) -> NodeSet {
        debug_assert!(v < MAX_NODES);
        NodeSet(self.0 | (1 << v))
    }

    #[must_use]
    pub fn remove(self, v: NodeId) -> NodeSet {
        NodeSet(self.0 & !(1 << v))
    }

    #[must_use]
    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersect(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & !other.0)
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Node ids in ascending order.
    pub fn iter(self) -> impl Iterator<Item = NodeId> {
        BitIter(self.0)
    }

    pub fn to_vec(self) -> Vec<NodeId> {
        self.iter().collect()
    }

    /// Errors unless every member is below `n`.
    pub fn check_within(self, n: u32) -> Result<()> {
        match self.difference(NodeSet::full(n)).iter().next() {
            Some(v) => Err(Error::NodeOutOfRange { node: v, n }),
            None => Ok(()),
        }
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> NodeSet {
        let mut s = NodeSet::EMPTY;
        for v in iter {
            s = s.insert(v);
        }
        s
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NodeSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<NodeId>::deserialize(deserializer)?;
        for &v in &ids {
            if v >= MAX_NODES {
                return Err(D::Error::custom(format!("node id {v} out of range")));
            }
        }
        Ok(NodeSet::from_ids(&ids))
    }
}

/// Set of edge indices in `0..64`, backed by a bitmask.
///
/// When all `m` edges of a graph are enumerated, the mask value itself is
/// the enumeration index: mask `u` in `0..2^m` has edge `i` live iff bit
/// `i` of `u` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EdgeSet(u64);

impl EdgeSet {
    pub const EMPTY: EdgeSet = EdgeSet(0);

    pub fn full(m: u32) -> EdgeSet {
        debug_assert!(m <= MAX_EDGES);
        if m == MAX_EDGES {
            EdgeSet(u64::MAX)
        } else {
            EdgeSet((1u64 << m) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> EdgeSet {
        EdgeSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, edge: u32) -> bool {
        edge < MAX_EDGES && self.0 & (1 << edge) != 0
    }

    #[must_use]
    pub fn insert(self, edge: u32) -> EdgeSet {
        debug_assert!(edge < MAX_EDGES);
        EdgeSet(self.0 | (1 << edge))
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        BitIter(self.0)
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            let i = self.0.trailing_zeros();
            self.0 &= self.0 - 1;
            Some(i)
        }
    }
}
