//! Influence graphs: storage, validation, boundary computation,
//! classification, file format and deterministic generators.

mod classify;
mod generate;
mod io;

pub use classify::{classify, GraphClassReport};
pub use generate::{generate, GeneratorSpec, ProbRule};
pub use io::{load_graph, parse_graph, save_graph, write_graph};

use crate::error::{Error, Result};
use crate::sets::{NodeId, NodeSet, MAX_EDGES, MAX_NODES};

/// Directed edge with an independent activation probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub prob: f64,
}

/// Directed influence graph under the independent cascade model.
///
/// Undirected inputs are expanded into one directed edge per direction at
/// construction; `directed()` reports which input form the graph came from.
/// Edge order is preserved from the input and defines the edge indexing
/// used by live-edge masks.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceGraph {
    n: u32,
    edges: Vec<Edge>,
    directed: bool,
    out: Vec<Vec<u32>>,
}

impl InfluenceGraph {
    pub fn from_directed_edges(n: u32, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let edges: Vec<Edge> = edges
            .iter()
            .map(|&(src, dst, prob)| Edge { src, dst, prob })
            .collect();
        Self::build(n, edges, true)
    }

    /// Each `(u, v, p_uv, p_vu)` pair expands to the directed edges
    /// `u -> v` and `v -> u`, adjacent in the edge order.
    pub fn from_undirected_edges(n: u32, pairs: &[(NodeId, NodeId, f64, f64)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(pairs.len() * 2);
        for &(u, v, p_uv, p_vu) in pairs {
            edges.push(Edge {
                src: u,
                dst: v,
                prob: p_uv,
            });
            edges.push(Edge {
                src: v,
                dst: u,
                prob: p_vu,
            });
        }
        Self::build(n, edges, false)
    }

    fn build(n: u32, edges: Vec<Edge>, directed: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        if n > MAX_NODES {
            return Err(Error::InvalidGraph(format!(
                "{n} nodes exceed the supported maximum of {MAX_NODES}"
            )));
        }
        if edges.len() as u32 > MAX_EDGES {
            return Err(Error::InvalidGraph(format!(
                "{} edges exceed the supported maximum of {MAX_EDGES}",
                edges.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if e.src >= n {
                return Err(Error::NodeOutOfRange { node: e.src, n });
            }
            if e.dst >= n {
                return Err(Error::NodeOutOfRange { node: e.dst, n });
            }
            if e.src == e.dst {
                return Err(Error::InvalidGraph(format!("self-loop at node {}", e.src)));
            }
            if !e.prob.is_finite() || !(0.0..=1.0).contains(&e.prob) {
                return Err(Error::InvalidGraph(format!(
                    "probability {} on edge {} -> {} is outside [0, 1]",
                    e.prob, e.src, e.dst
                )));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {} -> {}",
                    e.src, e.dst
                )));
            }
        }
        let mut out = vec![Vec::new(); n as usize];
        for (i, e) in edges.iter().enumerate() {
            out[e.src as usize].push(i as u32);
        }
        Ok(InfluenceGraph {
            n,
            edges,
            directed,
            out,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.edges.len() as u32
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet::full(self.n)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: u32) -> &Edge {
        &self.edges[index as usize]
    }

    /// Indices of the edges leaving `v`, in edge order.
    pub fn out_edges(&self, v: NodeId) -> &[u32] {
        &self.out[v as usize]
    }

    /// Whether the graph was given as directed input. Undirected inputs
    /// are stored expanded but keep their format for round-tripping.
    pub fn directed(&self) -> bool {
        self.directed
    }

    /// True if for every edge `u -> v` the reverse edge `v -> u` exists
    /// (probabilities may differ).
    pub fn has_symmetric_edges(&self) -> bool {
        self.edges
            .iter()
            .all(|e| self.find_edge(e.dst, e.src).is_some())
    }

    pub fn find_edge(&self, src: NodeId, dst: NodeId) -> Option<u32> {
        self.out
            .get(src as usize)?
            .iter()
            .copied()
            .find(|&i| self.edges[i as usize].dst == dst)
    }

    pub fn out_degree(&self, v: NodeId) -> u32 {
        self.out[v as usize].len() as u32
    }

    pub fn in_degree(&self, v: NodeId) -> u32 {
        self.edges.iter().filter(|e| e.dst == v).count() as u32
    }

    /// Neighbors of `v` in the undirected view (union of in- and
    /// out-neighbors).
    pub fn undirected_neighbors(&self, v: NodeId) -> NodeSet {
        let mut s = NodeSet::EMPTY;
        for e in &self.edges {
            if e.src == v {
                s = s.insert(e.dst);
            } else if e.dst == v {
                s = s.insert(e.src);
            }
        }
        s
    }
}

/// Nodes of `u` with at least one directed edge leaving `u`:
/// `{ v in U : exists (v, w) in E with w not in U }`.
pub fn boundary(g: &InfluenceGraph, u: NodeSet) -> Result<NodeSet> {
    u.check_within(g.n())?;
    let mut b = NodeSet::EMPTY;
    for v in u.iter() {
        for &ei in g.out_edges(v) {
            if !u.contains(g.edge(ei).dst) {
                b = b.insert(v);
                break;
            }
        }
    }
    Ok(b)
}

/// Connected components of the subgraph induced by `u` in the undirected
/// view, returned as disjoint node sets covering `u`.
pub fn induced_components(g: &InfluenceGraph, u: NodeSet) -> Result<Vec<NodeSet>> {
    u.check_within(g.n())?;
    let mut remaining = u;
    let mut components = Vec::new();
    while let Some(start) = remaining.iter().next() {
        let mut comp = NodeSet::singleton(start);
        let mut frontier = vec![start];
        while let Some(v) = frontier.pop() {
            for w in g.undirected_neighbors(v).intersect(u).iter() {
                if !comp.contains(w) {
                    comp = comp.insert(w);
                    frontier.push(w);
                }
            }
        }
        remaining = remaining.difference(comp);
        components.push(comp);
    }
    Ok(components)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_cycle() -> InfluenceGraph {
        // 0 - 1
        // |   |
        // 3 - 2
        InfluenceGraph::from_undirected_edges(
            4,
            &[
                (0, 1, 0.5, 0.5),
                (1, 2, 0.5, 0.5),
                (2, 3, 0.5, 0.5),
                (3, 0, 0.5, 0.5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn undirected_input_expands_both_directions() {
        let g = InfluenceGraph::from_undirected_edges(2, &[(0, 1, 0.3, 0.7)]).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.edge(0).prob, 0.3);
        assert_eq!(g.edge(1).prob, 0.7);
        assert_eq!((g.edge(1).src, g.edge(1).dst), (1, 0));
        assert!(!g.directed());
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        let err = InfluenceGraph::from_directed_edges(2, &[(1, 1, 0.5)]).unwrap_err();
        assert!(err.to_string().contains("self-loop"));
        let err = InfluenceGraph::from_directed_edges(2, &[(0, 1, 0.5), (0, 1, 0.2)]).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn rejects_bad_probabilities_and_ids() {
        assert!(InfluenceGraph::from_directed_edges(2, &[(0, 1, 1.5)]).is_err());
        assert!(InfluenceGraph::from_directed_edges(2, &[(0, 1, -0.1)]).is_err());
        assert!(InfluenceGraph::from_directed_edges(2, &[(0, 1, f64::NAN)]).is_err());
        assert!(matches!(
            InfluenceGraph::from_directed_edges(2, &[(0, 2, 0.5)]).unwrap_err(),
            Error::NodeOutOfRange { node: 2, n: 2 }
        ));
    }

    #[test]
    fn rejects_oversized_graphs() {
        assert!(InfluenceGraph::from_directed_edges(65, &[]).is_err());
        assert!(InfluenceGraph::from_directed_edges(0, &[]).is_err());
    }

    #[test]
    fn boundary_of_adjacent_cycle_pair() {
        let g = four_cycle();
        let u = NodeSet::from_ids(&[0, 1]);
        assert_eq!(boundary(&g, u).unwrap(), u);
    }

    #[test]
    fn boundary_of_everything_is_empty() {
        let g = four_cycle();
        assert_eq!(boundary(&g, g.nodes()).unwrap(), NodeSet::EMPTY);
        assert_eq!(boundary(&g, NodeSet::EMPTY).unwrap(), NodeSet::EMPTY);
    }

    #[test]
    fn boundary_checks_node_range() {
        let g = four_cycle();
        assert!(boundary(&g, NodeSet::singleton(7)).is_err());
    }

    #[test]
    fn induced_components_split_and_merge() {
        let g = four_cycle();
        let two_opposite = NodeSet::from_ids(&[0, 2]);
        assert_eq!(induced_components(&g, two_opposite).unwrap().len(), 2);
        let three = NodeSet::from_ids(&[0, 1, 2]);
        assert_eq!(induced_components(&g, three).unwrap(), vec![three]);
        assert!(induced_components(&g, NodeSet::EMPTY).unwrap().is_empty());
    }
}
