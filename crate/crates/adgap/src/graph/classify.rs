//! Structural classification of influence graphs.

use serde::{Deserialize, Serialize};

use super::InfluenceGraph;
use crate::sets::NodeId;

/// Which structural classes a graph belongs to.
///
/// `min_alpha` is the smallest `alpha` such that the graph is
/// alpha-bounded: the sum of undirected degrees over all nodes of degree
/// greater than two. It only applies to graphs whose edge set is
/// symmetric (an undirected view exists); for asymmetric digraphs it is
/// `None` and the alpha-bounded machinery does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphClassReport {
    pub is_in_arborescence: bool,
    pub is_out_arborescence: bool,
    pub is_one_directional_bipartite: bool,
    pub is_zero_bounded: bool,
    pub min_alpha: Option<u32>,
}

pub fn classify(g: &InfluenceGraph) -> GraphClassReport {
    let min_alpha = min_alpha(g);
    GraphClassReport {
        is_in_arborescence: is_in_arborescence(g),
        is_out_arborescence: is_out_arborescence(g),
        is_one_directional_bipartite: is_one_directional_bipartite(g),
        is_zero_bounded: min_alpha == Some(0),
        min_alpha,
    }
}

/// Every node except a single root has exactly one outgoing edge (to its
/// father) and following fathers always terminates at the root.
fn is_in_arborescence(g: &InfluenceGraph) -> bool {
    let n = g.n();
    let roots: Vec<NodeId> = (0..n).filter(|&v| g.out_degree(v) == 0).collect();
    if roots.len() != 1 || (0..n).any(|v| g.out_degree(v) > 1) {
        return false;
    }
    let root = roots[0];
    (0..n).all(|start| {
        let mut v = start;
        let mut steps = 0;
        while v != root {
            if steps > n {
                return false; // cycle
            }
            v = g.edge(g.out_edges(v)[0]).dst;
            steps += 1;
        }
        true
    })
}

/// Mirror image: every node except a single root has exactly one incoming
/// edge and following them backwards always terminates at the root.
fn is_out_arborescence(g: &InfluenceGraph) -> bool {
    let n = g.n();
    let mut in_edge: Vec<Option<NodeId>> = vec![None; n as usize];
    for e in g.edges() {
        if in_edge[e.dst as usize].is_some() {
            return false;
        }
        in_edge[e.dst as usize] = Some(e.src);
    }
    let roots: Vec<NodeId> = (0..n).filter(|&v| in_edge[v as usize].is_none()).collect();
    if roots.len() != 1 {
        return false;
    }
    let root = roots[0];
    (0..n).all(|start| {
        let mut v = start;
        let mut steps = 0;
        while v != root {
            if steps > n {
                return false;
            }
            v = in_edge[v as usize].unwrap();
            steps += 1;
        }
        true
    })
}

/// All edges run from pure sources to pure sinks: no node has both an
/// incoming and an outgoing edge.
fn is_one_directional_bipartite(g: &InfluenceGraph) -> bool {
    (0..g.n()).all(|v| g.out_degree(v) == 0 || g.in_degree(v) == 0)
}

fn min_alpha(g: &InfluenceGraph) -> Option<u32> {
    if !g.has_symmetric_edges() {
        return None;
    }
    let total = (0..g.n())
        .map(|v| g.undirected_neighbors(v).len())
        .filter(|&d| d > 2)
        .sum();
    Some(total)
}
