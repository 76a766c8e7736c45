//! Live-edge semantics of the independent cascade model.
//!
//! A live-edge graph keeps each edge independently with its activation
//! probability. The spread of a seed set is the expected number of nodes
//! reachable from it over live edges, computed either exactly by
//! enumerating all `2^m` live-edge graphs or by Monte Carlo sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::InfluenceGraph;
use crate::sets::{EdgeSet, NodeSet};
use crate::Caps;

/// One realization of the edge coin flips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiveEdgeGraph {
    pub live: EdgeSet,
    /// Probability of exactly this realization: the product of `p_e` over
    /// live edges times `1 - p_e` over the rest.
    pub weight: f64,
}

/// Monte Carlo spread estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Round-by-round cascade front: `layers[0]` is the seed set, each later
/// layer the nodes first reached in that round. Layers are disjoint and
/// the final layer is nonempty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionTrace {
    pub layers: Vec<NodeSet>,
}

impl DiffusionTrace {
    pub fn reached(&self) -> NodeSet {
        self.layers
            .iter()
            .fold(NodeSet::EMPTY, |acc, &l| acc.union(l))
    }
}

/// Flips every edge independently. Edges are flipped in index order, so
/// the draw sequence is reproducible for a given RNG state.
pub fn sample_live(g: &InfluenceGraph, rng: &mut impl Rng) -> LiveEdgeGraph {
    let mut live = EdgeSet::EMPTY;
    for (i, e) in g.edges().iter().enumerate() {
        if rng.gen::<f64>() < e.prob {
            live = live.insert(i as u32);
        }
    }
    LiveEdgeGraph {
        live,
        weight: mask_weight(g, live),
    }
}

pub fn mask_weight(g: &InfluenceGraph, live: EdgeSet) -> f64 {
    g.edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if live.contains(i as u32) {
                e.prob
            } else {
                1.0 - e.prob
            }
        })
        .product()
}

/// All `2^m` live-edge graphs in increasing binary order of the edge
/// mask. Weights sum to 1 up to rounding.
pub fn enumerate_live(g: &InfluenceGraph, caps: Caps) -> Result<Vec<LiveEdgeGraph>> {
    check_enumerable(g, caps)?;
    Ok(enumerate_weights(g)
        .into_iter()
        .enumerate()
        .map(|(mask, weight)| LiveEdgeGraph {
            live: EdgeSet::from_bits(mask as u64),
            weight,
        })
        .collect())
}

/// Weight of every mask `0..2^m`, indexed by mask value.
pub(crate) fn enumerate_weights(g: &InfluenceGraph) -> Vec<f64> {
    let m = g.m();
    // Start from the all-dead mask and flip one edge at a time: weight of
    // mask u is weight of u with its lowest set bit cleared, rescaled by
    // that edge's odds. Falls back to direct products when an edge has
    // p = 1 (odds would divide by zero).
    let mut weights = vec![0.0; 1usize << m];
    for (mask, w) in weights.iter_mut().enumerate() {
        *w = mask_weight(g, EdgeSet::from_bits(mask as u64));
    }
    weights
}

pub(crate) fn check_enumerable(g: &InfluenceGraph, caps: Caps) -> Result<()> {
    if g.m() > caps.max_edges {
        return Err(Error::EnumerationCap {
            edges: g.m(),
            cap: caps.max_edges,
        });
    }
    Ok(())
}

/// Forward closure of `seeds` over the live edges.
pub fn reach(g: &InfluenceGraph, seeds: NodeSet, live: EdgeSet) -> Result<NodeSet> {
    seeds.check_within(g.n())?;
    Ok(reach_unchecked(g, seeds, live))
}

pub(crate) fn reach_unchecked(g: &InfluenceGraph, seeds: NodeSet, live: EdgeSet) -> NodeSet {
    let mut reached = seeds;
    let mut frontier = seeds;
    while !frontier.is_empty() {
        let mut next = NodeSet::EMPTY;
        for v in frontier.iter() {
            for &ei in g.out_edges(v) {
                let dst = g.edge(ei).dst;
                if live.contains(ei) && !reached.contains(dst) {
                    next = next.insert(dst);
                }
            }
        }
        reached = reached.union(next);
        frontier = next;
    }
    reached
}

/// Exact spread: the weighted average of `|reach(seeds, L)|` over all
/// live-edge graphs.
pub fn spread_exact(g: &InfluenceGraph, seeds: NodeSet, caps: Caps) -> Result<f64> {
    seeds.check_within(g.n())?;
    check_enumerable(g, caps)?;
    if seeds.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for mask in 0u64..(1 << g.m()) {
        let live = EdgeSet::from_bits(mask);
        let w = mask_weight(g, live);
        if w > 0.0 {
            total += w * f64::from(reach_unchecked(g, seeds, live).len());
        }
    }
    Ok(total)
}

const MC_CHUNK: u64 = 1024;

/// Monte Carlo spread over `samples` independent live-edge draws.
///
/// Sampling is split into fixed-size chunks; chunk `c` draws from a
/// ChaCha stream keyed by `(seed, c)` and partial sums are combined in
/// chunk order, so the estimate is identical no matter how the chunks
/// are scheduled across workers.
pub fn spread_mc(
    g: &InfluenceGraph,
    seeds: NodeSet,
    samples: u64,
    seed: u64,
) -> Result<SpreadEstimate> {
    seeds.check_within(g.n())?;
    if samples == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    let chunks: Vec<(u64, u64)> = (0..samples.div_ceil(MC_CHUNK))
        .map(|c| (c, MC_CHUNK.min(samples - c * MC_CHUNK)))
        .collect();
    let partials: Vec<(f64, f64)> = if rayon::current_num_threads() > 1 {
        use rayon::prelude::*;
        chunks
            .par_iter()
            .map(|&(c, len)| mc_chunk(g, seeds, seed, c, len))
            .collect()
    } else {
        chunks
            .iter()
            .map(|&(c, len)| mc_chunk(g, seeds, seed, c, len))
            .collect()
    };
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for (s, sq) in partials {
        sum += s;
        sum_sq += sq;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let stderr = if samples > 1 {
        let var = ((sum_sq - sum * sum / nf) / (nf - 1.0)).max(0.0);
        (var / nf).sqrt()
    } else {
        0.0
    };
    Ok(SpreadEstimate {
        mean,
        stderr,
        samples,
    })
}

fn mc_chunk(g: &InfluenceGraph, seeds: NodeSet, seed: u64, chunk: u64, len: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..len {
        let live = sample_live(g, &mut rng).live;
        let size = f64::from(reach_unchecked(g, seeds, live).len());
        sum += size;
        sum_sq += size * size;
    }
    (sum, sum_sq)
}

/// Samples one live-edge graph and records the cascade front per round.
pub fn simulate_rounds(
    g: &InfluenceGraph,
    seeds: NodeSet,
    rng: &mut impl Rng,
) -> Result<DiffusionTrace> {
    let live = sample_live(g, rng).live;
    trace_on(g, seeds, live)
}

/// Round-by-round cascade on a fixed live-edge graph.
pub fn trace_on(g: &InfluenceGraph, seeds: NodeSet, live: EdgeSet) -> Result<DiffusionTrace> {
    seeds.check_within(g.n())?;
    if seeds.is_empty() {
        return Err(Error::InvalidInput(
            "diffusion trace needs a nonempty seed set".into(),
        ));
    }
    let mut layers = vec![seeds];
    let mut reached = seeds;
    loop {
        let frontier = *layers.last().unwrap();
        let mut next = NodeSet::EMPTY;
        for v in frontier.iter() {
            for &ei in g.out_edges(v) {
                let dst = g.edge(ei).dst;
                if live.contains(ei) && !reached.contains(dst) {
                    next = next.insert(dst);
                }
            }
        }
        if next.is_empty() {
            return Ok(DiffusionTrace { layers });
        }
        reached = reached.union(next);
        layers.push(next);
    }
}
