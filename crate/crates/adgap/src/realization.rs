//! Realizations of the edge coin flips and what a policy has observed.
//!
//! A realization maps every node `v` to its full-adoption feedback
//! `reach({v}, L)` under one live-edge graph `L`. A partial realization
//! records the feedback for the seeds picked so far; conditioning the
//! live-edge distribution on it gives the posterior used by adaptive
//! policies and by the marginal gain `delta`.

use std::collections::{BTreeMap, HashMap};

use crate::diffusion::{check_enumerable, mask_weight, reach_unchecked, LiveEdgeGraph};
use crate::error::{Error, Result};
use crate::graph::InfluenceGraph;
use crate::sets::{EdgeSet, NodeId, NodeSet};
use crate::Caps;

/// Full-adoption feedback for every node under one live-edge graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    reach: Vec<NodeSet>,
}

impl Realization {
    pub fn reach_of(&self, v: NodeId) -> NodeSet {
        self.reach[v as usize]
    }

    pub fn as_slice(&self) -> &[NodeSet] {
        &self.reach
    }
}

/// `reach({v}, live)` for every node `v`.
pub fn realize(g: &InfluenceGraph, live: EdgeSet) -> Realization {
    Realization {
        reach: (0..g.n())
            .map(|v| reach_unchecked(g, NodeSet::singleton(v), live))
            .collect(),
    }
}

/// Ordered list of `(seed, observed reach)` pairs.
///
/// Seeds are distinct and each seed belongs to its own observation; the
/// selection order is preserved, while `canonical_key` sorts entries by
/// seed for order-independent comparison and memoization.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartialRealization {
    entries: Vec<(NodeId, NodeSet)>,
}

impl PartialRealization {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: &[(NodeId, NodeSet)]) -> Result<Self> {
        let mut psi = Self::empty();
        for &(seed, observed) in entries {
            psi.push(seed, observed)?;
        }
        Ok(psi)
    }

    pub fn push(&mut self, seed: NodeId, observed: NodeSet) -> Result<()> {
        if self.dom().contains(seed) {
            return Err(Error::InvalidInput(format!(
                "seed {seed} already present in the partial realization"
            )));
        }
        if !observed.contains(seed) {
            return Err(Error::InvalidInput(format!(
                "observation {observed} does not contain its seed {seed}"
            )));
        }
        self.entries.push((seed, observed));
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, seed: NodeId, observed: NodeSet) {
        debug_assert!(!self.dom().contains(seed));
        debug_assert!(observed.contains(seed));
        self.entries.push((seed, observed));
    }

    pub(crate) fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn entries(&self) -> &[(NodeId, NodeSet)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Seeds picked so far.
    pub fn dom(&self) -> NodeSet {
        self.entries
            .iter()
            .fold(NodeSet::EMPTY, |acc, &(s, _)| acc.insert(s))
    }

    /// Union of all observations: every node known to be reached.
    pub fn reached(&self) -> NodeSet {
        self.entries
            .iter()
            .fold(NodeSet::EMPTY, |acc, &(_, o)| acc.union(o))
    }

    /// The objective value `f`: how many nodes are reached.
    pub fn reached_count(&self) -> u32 {
        self.reached().len()
    }

    /// Entries restricted to the seeds in `dom_subset`, in ascending
    /// seed order.
    pub fn restriction(&self, dom_subset: NodeSet) -> PartialRealization {
        let mut entries: Vec<(NodeId, NodeSet)> = self
            .entries
            .iter()
            .copied()
            .filter(|&(s, _)| dom_subset.contains(s))
            .collect();
        entries.sort_unstable_by_key(|&(s, _)| s);
        PartialRealization { entries }
    }

    /// Order-independent identity: entries sorted by seed.
    pub fn canonical_key(&self) -> Vec<(NodeId, u64)> {
        let mut key: Vec<(NodeId, u64)> =
            self.entries.iter().map(|&(s, o)| (s, o.bits())).collect();
        key.sort_unstable();
        key
    }
}

/// Whether some live-edge graph could have produced `psi`, checked
/// structurally against this particular `live` mask: every recorded
/// observation must equal the actual reach.
pub fn is_consistent(g: &InfluenceGraph, psi: &PartialRealization, live: EdgeSet) -> Result<bool> {
    psi.dom().check_within(g.n())?;
    psi.reached().check_within(g.n())?;
    Ok(psi
        .entries()
        .iter()
        .all(|&(s, o)| reach_unchecked(g, NodeSet::singleton(s), live) == o))
}

/// Live-edge distribution conditioned on a partial realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    /// Consistent live-edge graphs, each with its renormalized weight.
    pub support: Vec<(LiveEdgeGraph, f64)>,
}

/// All live-edge graphs consistent with `psi`, weights renormalized to
/// sum to 1. Errors if no positive-probability live-edge graph is
/// consistent (the observations can never happen under this graph).
pub fn posterior(g: &InfluenceGraph, psi: &PartialRealization, caps: Caps) -> Result<Posterior> {
    check_enumerable(g, caps)?;
    psi.dom().check_within(g.n())?;
    psi.reached().check_within(g.n())?;
    let mut support = Vec::new();
    let mut mass = 0.0;
    for mask in 0u64..(1 << g.m()) {
        let live = EdgeSet::from_bits(mask);
        if is_consistent(g, psi, live)? {
            let weight = mask_weight(g, live);
            mass += weight;
            support.push((LiveEdgeGraph { live, weight }, weight));
        }
    }
    if support.is_empty() || mass <= 0.0 {
        return Err(Error::InconsistentRealization);
    }
    for entry in &mut support {
        entry.1 /= mass;
    }
    Ok(Posterior { support })
}

/// Expected gain in `f` from seeding `node` on top of `psi`, over the
/// posterior. Zero whenever `node` is already reached.
pub fn delta(
    g: &InfluenceGraph,
    node: NodeId,
    psi: &PartialRealization,
    caps: Caps,
) -> Result<f64> {
    if node >= g.n() {
        return Err(Error::NodeOutOfRange { node, n: g.n() });
    }
    let model = EnumeratedModel::new(g, caps)?;
    model.delta(node, psi)
}

/// Precomputed live-edge enumeration: all mask weights plus the singleton
/// reach table `reach({v}, mask)` for every node and mask. Shared by the
/// exact oracles, the posterior machinery and the lemma checkers.
pub struct EnumeratedModel<'g> {
    g: &'g InfluenceGraph,
    weights: Vec<f64>,
    /// `reach1[v][mask]`
    reach1: Vec<Vec<NodeSet>>,
    positive: Vec<u32>,
}

impl<'g> EnumeratedModel<'g> {
    pub fn new(g: &'g InfluenceGraph, caps: Caps) -> Result<Self> {
        check_enumerable(g, caps)?;
        let m = g.m();
        let count = 1usize << m;
        let weights: Vec<f64> = (0..count)
            .map(|mask| mask_weight(g, EdgeSet::from_bits(mask as u64)))
            .collect();
        let reach1: Vec<Vec<NodeSet>> = (0..g.n())
            .map(|v| {
                (0..count)
                    .map(|mask| {
                        reach_unchecked(g, NodeSet::singleton(v), EdgeSet::from_bits(mask as u64))
                    })
                    .collect()
            })
            .collect();
        let positive = (0..count as u32)
            .filter(|&u| weights[u as usize] > 0.0)
            .collect();
        Ok(EnumeratedModel {
            g,
            weights,
            reach1,
            positive,
        })
    }

    pub fn graph(&self) -> &'g InfluenceGraph {
        self.g
    }

    pub fn mask_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, mask: u32) -> f64 {
        self.weights[mask as usize]
    }

    pub fn singleton_reach(&self, v: NodeId, mask: u32) -> NodeSet {
        self.reach1[v as usize][mask as usize]
    }

    /// Masks with strictly positive probability, ascending.
    pub fn positive_masks(&self) -> &[u32] {
        &self.positive
    }

    /// Exact spread via the singleton-reach table: the reach of a set is
    /// the union of the reaches of its members.
    pub fn spread(&self, seeds: NodeSet) -> f64 {
        let mut total = 0.0;
        for &mask in &self.positive {
            total += self.weights[mask as usize] * f64::from(self.reach_of_set(seeds, mask).len());
        }
        total
    }

    pub fn reach_of_set(&self, seeds: NodeSet, mask: u32) -> NodeSet {
        seeds.iter().fold(NodeSet::EMPTY, |acc, v| {
            acc.union(self.singleton_reach(v, mask))
        })
    }

    fn mask_consistent(&self, psi: &PartialRealization, mask: u32) -> bool {
        psi.entries()
            .iter()
            .all(|&(s, o)| self.singleton_reach(s, mask) == o)
    }

    /// Positive-probability masks consistent with `psi`, plus their total
    /// mass. Errors if the mass is zero: `psi` can never be observed.
    pub fn consistent_support(&self, psi: &PartialRealization) -> Result<(Vec<u32>, f64)> {
        psi.dom().check_within(self.g.n())?;
        psi.reached().check_within(self.g.n())?;
        let support: Vec<u32> = self
            .positive
            .iter()
            .copied()
            .filter(|&mask| self.mask_consistent(psi, mask))
            .collect();
        let mass: f64 = support.iter().map(|&u| self.weights[u as usize]).sum();
        if support.is_empty() || mass <= 0.0 {
            return Err(Error::InconsistentRealization);
        }
        Ok((support, mass))
    }

    /// `delta` restricted to a known support (raw weights, total `mass`).
    pub fn delta_on_support(
        &self,
        node: NodeId,
        reached: NodeSet,
        support: &[u32],
        mass: f64,
    ) -> f64 {
        let base = f64::from(reached.len());
        let mut total = 0.0;
        for &mask in support {
            let joined = reached.union(self.singleton_reach(node, mask));
            total += self.weights[mask as usize] * (f64::from(joined.len()) - base);
        }
        total / mass
    }

    /// Expected gain in `f` from seeding `node` on top of `psi`.
    pub fn delta(&self, node: NodeId, psi: &PartialRealization) -> Result<f64> {
        if node >= self.g.n() {
            return Err(Error::NodeOutOfRange {
                node,
                n: self.g.n(),
            });
        }
        let (support, mass) = self.consistent_support(psi)?;
        Ok(self.delta_on_support(node, psi.reached(), &support, mass))
    }

    /// Distinct restrictions of the full realization to `seeds`, over
    /// positive-probability masks, each with the probability of
    /// observing it. Probabilities sum to 1; order is canonical.
    pub fn realized_restrictions(&self, seeds: NodeSet) -> Vec<(PartialRealization, f64)> {
        let mut by_key: BTreeMap<Vec<(NodeId, u64)>, (PartialRealization, f64)> = BTreeMap::new();
        for &mask in &self.positive {
            let psi = self.restriction_at(seeds, mask);
            let entry = by_key
                .entry(psi.canonical_key())
                .or_insert_with(|| (psi, 0.0));
            entry.1 += self.weights[mask as usize];
        }
        by_key.into_values().collect()
    }

    /// Distinct restrictions over all `2^m` masks, zero-probability ones
    /// included (structural checks quantify over every live-edge graph).
    pub fn all_restrictions(&self, seeds: NodeSet) -> Vec<PartialRealization> {
        let mut by_key: BTreeMap<Vec<(NodeId, u64)>, PartialRealization> = BTreeMap::new();
        for mask in 0..self.mask_count() as u32 {
            let psi = self.restriction_at(seeds, mask);
            by_key.entry(psi.canonical_key()).or_insert(psi);
        }
        by_key.into_values().collect()
    }

    fn restriction_at(&self, seeds: NodeSet, mask: u32) -> PartialRealization {
        let mut psi = PartialRealization::empty();
        for v in seeds.iter() {
            psi.push_unchecked(v, self.singleton_reach(v, mask));
        }
        psi
    }
}

/// Result of the exhaustive adaptive-submodularity check.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SubmodularityReport {
    pub comparisons: u64,
    pub min_slack: f64,
    pub pass: bool,
}

pub const INEQUALITY_TOLERANCE: f64 = 1e-7;

/// Exhaustively verifies that the marginal gain can only shrink as more
/// is observed: for every realized pair `psi` contained in `psi_prime`
/// and every node `i` not reached under `psi_prime`,
/// `delta(i | psi_prime) <= delta(i | psi)` up to tolerance.
pub fn check_adaptive_submodularity(g: &InfluenceGraph, caps: Caps) -> Result<SubmodularityReport> {
    let model = EnumeratedModel::new(g, caps)?;
    let n = g.n();

    // Realized partial realizations for every dom set, deduplicated.
    let mut realized: BTreeMap<Vec<(NodeId, u64)>, PartialRealization> = BTreeMap::new();
    for dom_bits in 0u64..(1 << n) {
        let dom = NodeSet::from_bits(dom_bits);
        for &mask in model.positive_masks() {
            let psi = model.restriction_at(dom, mask);
            realized.entry(psi.canonical_key()).or_insert(psi);
        }
    }

    // Marginal gains for every node at every realized partial realization.
    let mut gains: HashMap<Vec<(NodeId, u64)>, Vec<f64>> = HashMap::new();
    for (key, psi) in &realized {
        let (support, mass) = model.consistent_support(psi)?;
        let reached = psi.reached();
        let all: Vec<f64> = (0..n)
            .map(|i| model.delta_on_support(i, reached, &support, mass))
            .collect();
        debug_assert!(all.iter().all(|&d| d >= -INEQUALITY_TOLERANCE
            && d <= f64::from(n - reached.len()) + INEQUALITY_TOLERANCE));
        gains.insert(key.clone(), all);
    }

    let mut comparisons = 0u64;
    let mut min_slack = f64::INFINITY;
    for psi_prime in realized.values() {
        let later = &gains[&psi_prime.canonical_key()];
        let dom = psi_prime.dom();
        let candidates = NodeSet::full(n).difference(psi_prime.reached());
        let dom_ids = dom.to_vec();
        for sub_bits in 0u64..(1 << dom_ids.len()) {
            let sub: NodeSet = dom_ids
                .iter()
                .enumerate()
                .filter(|&(j, _)| sub_bits & (1 << j) != 0)
                .map(|(_, &v)| v)
                .collect();
            let psi = psi_prime.restriction(sub);
            let earlier = &gains[&psi.canonical_key()];
            for i in candidates.iter() {
                let slack = earlier[i as usize] - later[i as usize];
                min_slack = min_slack.min(slack);
                comparisons += 1;
            }
        }
    }
    Ok(SubmodularityReport {
        comparisons,
        min_slack,
        pass: min_slack >= -INEQUALITY_TOLERANCE,
    })
}
