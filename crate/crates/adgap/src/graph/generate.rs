//! Deterministic, seeded instance generators.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::InfluenceGraph;
use crate::error::{Error, Result};
use crate::sets::MAX_NODES;

/// Graph shapes the generator knows how to build.
///
/// Random choices (tree attachment, random edge sets, probability draws)
/// come from a ChaCha stream seeded with the caller's seed, so every spec
/// is reproducible. Node 0 is the root of both arborescence shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorSpec {
    InArborescence { n: u32 },
    OutArborescence { n: u32 },
    Path { n: u32 },
    Cycle { n: u32 },
    OneDirectionalBipartite { left: u32, right: u32 },
    StarSubdivision { rays: u32, segment: u32 },
    ParallelLinks { links: u32, segment: u32 },
    RandomDigraph { n: u32, m: u32 },
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GeneratorSpec::InArborescence { n } => write!(f, "in-arborescence({n})"),
            GeneratorSpec::OutArborescence { n } => write!(f, "out-arborescence({n})"),
            GeneratorSpec::Path { n } => write!(f, "path({n})"),
            GeneratorSpec::Cycle { n } => write!(f, "cycle({n})"),
            GeneratorSpec::OneDirectionalBipartite { left, right } => {
                write!(f, "bipartite({left},{right})")
            }
            GeneratorSpec::StarSubdivision { rays, segment } => {
                write!(f, "star-subdivision({rays},{segment})")
            }
            GeneratorSpec::ParallelLinks { links, segment } => {
                write!(f, "parallel-links({links},{segment})")
            }
            GeneratorSpec::RandomDigraph { n, m } => write!(f, "random({n},{m})"),
        }
    }
}

/// How edge probabilities are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProbRule {
    Constant(f64),
    /// Independent uniform draw from `[lo, hi)` per directed edge.
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl ProbRule {
    fn validate(&self) -> Result<()> {
        match *self {
            ProbRule::Constant(p) if p.is_finite() && (0.0..=1.0).contains(&p) => Ok(()),
            ProbRule::Uniform { lo, hi }
                if lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= 1.0 =>
            {
                Ok(())
            }
            _ => Err(Error::InvalidInput(format!(
                "probability rule {self:?} is outside [0, 1]"
            ))),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ProbRule::Constant(p) => p,
            ProbRule::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
        }
    }
}

pub fn generate(spec: GeneratorSpec, rule: ProbRule, seed: u64) -> Result<InfluenceGraph> {
    rule.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec {
        GeneratorSpec::InArborescence { n } => {
            let shape = random_tree_edges(n, &mut rng)?;
            directed(n, shape, rule, &mut rng)
        }
        GeneratorSpec::OutArborescence { n } => {
            let shape = random_tree_edges(n, &mut rng)?
                .into_iter()
                .map(|(child, father)| (father, child))
                .collect();
            directed(n, shape, rule, &mut rng)
        }
        GeneratorSpec::Path { n } => {
            check_nodes(spec, n)?;
            undirected(n, (1..n).map(|i| (i - 1, i)).collect(), rule, &mut rng)
        }
        GeneratorSpec::Cycle { n } => {
            if n < 3 {
                return Err(Error::InfeasibleSpec(format!(
                    "cycle({n}) needs at least 3 nodes (shorter cycles duplicate edges or self-loop)"
                )));
            }
            check_nodes(spec, n)?;
            undirected(
                n,
                (0..n).map(|i| (i, (i + 1) % n)).collect(),
                rule,
                &mut rng,
            )
        }
        GeneratorSpec::OneDirectionalBipartite { left, right } => {
            if left == 0 || right == 0 {
                return Err(Error::InfeasibleSpec(format!(
                    "bipartite({left},{right}) needs both sides nonempty"
                )));
            }
            check_nodes(spec, left + right)?;
            let shape = (0..left)
                .flat_map(|u| (0..right).map(move |v| (u, left + v)))
                .collect();
            directed(left + right, shape, rule, &mut rng)
        }
        GeneratorSpec::StarSubdivision { rays, segment } => {
            if rays == 0 || segment == 0 {
                return Err(Error::InfeasibleSpec(format!(
                    "star-subdivision({rays},{segment}) needs at least one ray and one segment"
                )));
            }
            let n = 1 + rays * segment;
            check_nodes(spec, n)?;
            let mut shape = Vec::new();
            for r in 0..rays {
                let mut prev = 0;
                for s in 0..segment {
                    let next = 1 + r * segment + s;
                    shape.push((prev, next));
                    prev = next;
                }
            }
            undirected(n, shape, rule, &mut rng)
        }
        GeneratorSpec::ParallelLinks { links, segment } => {
            if links == 0 || segment == 0 {
                return Err(Error::InfeasibleSpec(format!(
                    "parallel-links({links},{segment}) needs at least one link and one segment"
                )));
            }
            if links >= 2 && segment < 2 {
                return Err(Error::InfeasibleSpec(format!(
                    "parallel-links({links},1) would duplicate the terminal edge; use segment >= 2"
                )));
            }
            let n = 2 + links * (segment - 1);
            check_nodes(spec, n)?;
            let mut shape = Vec::new();
            for l in 0..links {
                let mut prev = 0;
                for s in 0..segment - 1 {
                    let next = 2 + l * (segment - 1) + s;
                    shape.push((prev, next));
                    prev = next;
                }
                shape.push((prev, 1));
            }
            undirected(n, shape, rule, &mut rng)
        }
        GeneratorSpec::RandomDigraph { n, m } => {
            check_nodes(spec, n)?;
            let all_pairs = u64::from(n) * u64::from(n - 1);
            if u64::from(m) > all_pairs {
                return Err(Error::InfeasibleSpec(format!(
                    "random({n},{m}) asks for more than the {all_pairs} possible directed edges"
                )));
            }
            let picked =
                rand::seq::index::sample(&mut rng, all_pairs as usize, m as usize).into_vec();
            let mut shape: Vec<(u32, u32)> = picked
                .into_iter()
                .map(|idx| {
                    let u = (idx as u32) / (n - 1);
                    let rest = (idx as u32) % (n - 1);
                    let v = if rest >= u { rest + 1 } else { rest };
                    (u, v)
                })
                .collect();
            shape.sort_unstable();
            directed(n, shape, rule, &mut rng)
        }
    }
}

fn check_nodes(spec: GeneratorSpec, n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InfeasibleSpec(format!("{spec} has no nodes")));
    }
    if n > MAX_NODES {
        return Err(Error::InfeasibleSpec(format!(
            "{spec} needs {n} nodes, maximum is {MAX_NODES}"
        )));
    }
    Ok(())
}

/// Random tree rooted at node 0, as (child, father) pairs: each node
/// attaches to a uniformly random earlier node.
fn random_tree_edges(n: u32, rng: &mut ChaCha8Rng) -> Result<Vec<(u32, u32)>> {
    if n == 0 || n > MAX_NODES {
        return Err(Error::InfeasibleSpec(format!(
            "arborescence needs between 1 and {MAX_NODES} nodes, got {n}"
        )));
    }
    Ok((1..n)
        .map(|child| (child, rng.gen_range(0..child)))
        .collect())
}

fn directed(
    n: u32,
    shape: Vec<(u32, u32)>,
    rule: ProbRule,
    rng: &mut ChaCha8Rng,
) -> Result<InfluenceGraph> {
    let edges: Vec<(u32, u32, f64)> = shape
        .into_iter()
        .map(|(u, v)| (u, v, rule.draw(rng)))
        .collect();
    InfluenceGraph::from_directed_edges(n, &edges)
}

fn undirected(
    n: u32,
    shape: Vec<(u32, u32)>,
    rule: ProbRule,
    rng: &mut ChaCha8Rng,
) -> Result<InfluenceGraph> {
    let pairs: Vec<(u32, u32, f64, f64)> = shape
        .into_iter()
        .map(|(u, v)| {
            let p_uv = rule.draw(rng);
            let p_vu = rule.draw(rng);
            (u, v, p_uv, p_vu)
        })
        .collect();
    InfluenceGraph::from_undirected_edges(n, &pairs)
}
