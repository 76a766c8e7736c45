//! Adaptivity-gap bounds and the inequality verification suite.
//!
//! The adaptivity gap of an instance is `OPT_A / OPT_N` at a given
//! budget. `measure_gap` computes it with the exact oracles and checks
//! it against every closed-form bound whose graph class applies.
//! `verify_lemma_suite` exhaustively checks the supporting inequalities
//! the bounds rest on, reporting the worst slack seen for each.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{boundary, classify, induced_components, GraphClassReport, InfluenceGraph};
use crate::policies::{
    marginals, opt_adaptive, opt_nonadaptive, MarginalVector, NonAdaptiveOptimum, PolicyTree,
};
use crate::realization::{EnumeratedModel, INEQUALITY_TOLERANCE};
use crate::sets::NodeSet;
use crate::Caps;

fn require_k(name: &str, k: u32, min: u32) -> Result<()> {
    if k < min {
        return Err(Error::BoundDomain(format!(
            "{name} is defined for budgets k >= {min}, got {k}"
        )));
    }
    Ok(())
}

/// Gap bound for in-arborescences: `2 / (1 - (1 - 2/k)^k)`, defined for
/// k >= 2. Nondecreasing in k with limit `2e^2 / (e^2 - 1)`.
pub fn bound_in_arborescence(k: u32) -> Result<f64> {
    require_k("the in-arborescence bound", k, 2)?;
    let kk = f64::from(k);
    Ok(2.0 / (1.0 - (1.0 - 2.0 / kk).powi(k as i32)))
}

/// Universal gap bound: the budget itself.
pub fn bound_budget(k: u32) -> Result<f64> {
    require_k("the budget bound", k, 1)?;
    Ok(f64::from(k))
}

/// Universal gap bound: the cube root of the node count, rounded up.
/// Integer search keeps perfect cubes exact.
pub fn bound_cube_root(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::BoundDomain(
            "the cube-root bound needs at least one node".into(),
        ));
    }
    let n = u64::from(n);
    let mut t: u64 = 1;
    while t * t * t < n {
        t += 1;
    }
    Ok(t as f64)
}

/// Gap bound for graphs whose high-degree mass is `alpha`:
/// `min{k, alpha/k + 2 + 1/(1 - (1 - 1/k)^k)}`, defined for k >= 2.
pub fn bound_alpha(alpha: u32, k: u32) -> Result<f64> {
    require_k("the alpha-bounded bound", k, 2)?;
    let kk = f64::from(k);
    let tail = 1.0 / (1.0 - (1.0 - 1.0 / kk).powi(k as i32));
    Ok(kk.min(f64::from(alpha) / kk + 2.0 + tail))
}

/// Budget-free form of the alpha bound:
/// `(sqrt(4(e-1)^2 alpha + (3e-2)^2) + 3e - 2) / (2(e-1))`.
/// Upper-bounds `bound_alpha(alpha, k)` for every k >= 2.
pub fn bound_alpha_closed_form(alpha: u32) -> f64 {
    let a = f64::from(alpha);
    let c = 3.0 * E - 2.0;
    ((4.0 * (E - 1.0).powi(2) * a + c * c).sqrt() + c) / (2.0 * (E - 1.0))
}

/// Gap bound for graphs with no node of degree above two:
/// `min{k, 3 / (1 - max(0, 1 - 3/k)^k)}`, defined for k >= 2.
/// Bounded above by `3e^3 / (e^3 - 1)`.
pub fn bound_zero_bounded(k: u32) -> Result<f64> {
    require_k("the zero-bounded bound", k, 2)?;
    let kk = f64::from(k);
    let base = (1.0 - 3.0 / kk).max(0.0);
    Ok(kk.min(3.0 / (1.0 - base.powi(k as i32))))
}

/// Reference constant for general graphs, `2e / (e - 1)`, used as the
/// comparison column in bound sweeps.
pub fn bound_reference_general() -> f64 {
    2.0 * E / (E - 1.0)
}

/// One evaluated bound with the inputs it was evaluated at. `value` is
/// 0 when the bound does not apply to the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub name: String,
    pub value: f64,
    pub applicable: bool,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub alpha: Option<u32>,
}

/// Evaluates every gap bound against an instance's class report. The
/// budget and cube-root bounds always apply; the class bounds require
/// their class and a budget of at least two.
pub fn applicable_bounds(class: &GraphClassReport, n: u32, k: u32) -> Result<Vec<BoundValue>> {
    require_k("gap measurement", k, 1)?;
    let mut out = vec![
        BoundValue {
            name: "budget".into(),
            value: bound_budget(k)?,
            applicable: true,
            n: None,
            k: Some(k),
            alpha: None,
        },
        BoundValue {
            name: "cube-root".into(),
            value: bound_cube_root(n)?,
            applicable: true,
            n: Some(n),
            k: None,
            alpha: None,
        },
    ];
    let in_arb = class.is_in_arborescence && k >= 2;
    out.push(BoundValue {
        name: "in-arborescence".into(),
        value: if in_arb {
            bound_in_arborescence(k)?
        } else {
            0.0
        },
        applicable: in_arb,
        n: None,
        k: Some(k),
        alpha: None,
    });
    let alpha_ok = class.min_alpha.is_some() && k >= 2;
    out.push(BoundValue {
        name: "alpha-bounded".into(),
        value: match class.min_alpha {
            Some(alpha) if k >= 2 => bound_alpha(alpha, k)?,
            _ => 0.0,
        },
        applicable: alpha_ok,
        n: None,
        k: Some(k),
        alpha: class.min_alpha,
    });
    let zero_ok = class.is_zero_bounded && k >= 2;
    out.push(BoundValue {
        name: "zero-bounded".into(),
        value: if zero_ok { bound_zero_bounded(k)? } else { 0.0 },
        applicable: zero_ok,
        n: None,
        k: Some(k),
        alpha: None,
    });
    Ok(out)
}

/// One bound checked against a measured ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub bound: String,
    pub value: f64,
    pub pass: bool,
    pub slack: f64,
}

/// Measured adaptivity gap of one instance with its bound checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub instance: String,
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub opt_adaptive: f64,
    pub opt_nonadaptive: f64,
    pub ratio: f64,
    pub class: GraphClassReport,
    pub checks: Vec<GapCheck>,
}

impl GapReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// One verified inequality: how many pointwise comparisons ran and the
/// smallest slack (right side minus left side) seen across them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub check: String,
    pub applicable: bool,
    pub instances: u64,
    pub min_slack: Option<f64>,
    pub pass: bool,
}

struct SlackTracker {
    instances: u64,
    min_slack: f64,
}

impl SlackTracker {
    fn new() -> Self {
        SlackTracker {
            instances: 0,
            min_slack: f64::INFINITY,
        }
    }

    fn push(&mut self, slack: f64) {
        self.instances += 1;
        if slack < self.min_slack {
            self.min_slack = slack;
        }
    }

    fn finish(self, check: &str, applicable: bool) -> LemmaCheck {
        let min_slack = (self.instances > 0).then_some(self.min_slack);
        LemmaCheck {
            check: check.into(),
            applicable,
            instances: self.instances,
            min_slack,
            pass: !applicable || min_slack.is_some_and(|s| s >= -INEQUALITY_TOLERANCE),
        }
    }
}

fn skipped(check: &str) -> LemmaCheck {
    SlackTracker::new().finish(check, false)
}

pub fn suite_passes(checks: &[LemmaCheck]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Everything the gap and lemma checks need about one instance,
/// computed once: classification, both exact oracles, the optimal
/// policy's marginals, and the enumerated model.
pub struct InstanceAnalysis<'g> {
    g: &'g InfluenceGraph,
    k: u32,
    class: GraphClassReport,
    tree: PolicyTree,
    x: MarginalVector,
    opt: NonAdaptiveOptimum,
    model: EnumeratedModel<'g>,
}

impl<'g> InstanceAnalysis<'g> {
    pub fn new(g: &'g InfluenceGraph, k: u32, caps: Caps) -> Result<Self> {
        require_k("gap measurement", k, 1)?;
        let tree = opt_adaptive(g, k, caps)?;
        let x = marginals(&tree)?;
        let opt = opt_nonadaptive(g, k, caps)?;
        Ok(InstanceAnalysis {
            g,
            k,
            class: classify(g),
            tree,
            x,
            opt,
            model: EnumeratedModel::new(g, caps)?,
        })
    }

    pub fn opt_adaptive_value(&self) -> f64 {
        self.tree.value()
    }

    pub fn opt_nonadaptive_value(&self) -> f64 {
        self.opt.value(self.k)
    }

    pub fn class(&self) -> &GraphClassReport {
        &self.class
    }

    pub fn gap_report(&self) -> Result<GapReport> {
        let opt_a = self.opt_adaptive_value();
        let opt_n = self.opt_nonadaptive_value();
        let ratio = opt_a / opt_n;
        let checks = applicable_bounds(&self.class, self.g.n(), self.k)?
            .into_iter()
            .filter(|b| b.applicable)
            .map(|b| GapCheck {
                bound: b.name,
                value: b.value,
                pass: ratio <= b.value + INEQUALITY_TOLERANCE,
                slack: b.value - ratio,
            })
            .collect();
        Ok(GapReport {
            instance: String::new(),
            n: self.g.n(),
            m: self.g.m(),
            k: self.k,
            opt_adaptive: opt_a,
            opt_nonadaptive: opt_n,
            ratio,
            class: self.class,
            checks,
        })
    }

    /// Runs every inequality check that applies to this instance's
    /// class, quantified exhaustively as each check requires.
    pub fn lemma_suite(&self) -> Result<Vec<LemmaCheck>> {
        let alpha = self.class.min_alpha;
        let mut out = vec![self.check_hybrid_dominance()?];
        out.push(if self.class.is_in_arborescence {
            self.check_reached_spread("reached-spread-in-arborescence", |t_prev, _| {
                Ok(self.opt.value(t_prev))
            })?
        } else {
            skipped("reached-spread-in-arborescence")
        });
        out.push(match alpha {
            Some(a) => self.check_reached_spread("reached-spread-alpha-bounded", |_, k| {
                Ok((f64::from(a) / f64::from(k) + 2.0) * self.opt.value(k))
            })?,
            None => skipped("reached-spread-alpha-bounded"),
        });
        out.push(if self.class.is_zero_bounded {
            self.check_reached_spread("reached-spread-zero-bounded", |t_prev, _| {
                Ok(2.0 * self.opt.value(t_prev))
            })?
        } else {
            skipped("reached-spread-zero-bounded")
        });
        out.push(self.check_subset_spread_scaling());
        out.push(match alpha {
            Some(a) if self.g.n() <= 8 => self.check_boundary_count(a)?,
            _ => skipped("boundary-count"),
        });
        out.push(if self.class.is_in_arborescence && self.k >= 2 {
            self.check_recursion("recursion-in-arborescence", |opt_a, k, prev| {
                opt_a / f64::from(k) + (1.0 - 2.0 / f64::from(k)) * prev
            })
        } else {
            skipped("recursion-in-arborescence")
        });
        out.push(match alpha {
            Some(a) if self.k >= 2 => {
                let opt_k = self.opt.value(self.k);
                self.check_recursion("recursion-alpha-bounded", move |opt_a, k, prev| {
                    let kk = f64::from(k);
                    (opt_a - (f64::from(a) / kk + 2.0) * opt_k) / kk + (1.0 - 1.0 / kk) * prev
                })
            }
            _ => skipped("recursion-alpha-bounded"),
        });
        out.push(if self.class.is_zero_bounded && self.k >= 2 {
            self.check_recursion("recursion-zero-bounded", |opt_a, k, prev| {
                opt_a / f64::from(k) + (1.0 - 3.0 / f64::from(k)) * prev
            })
        } else {
            skipped("recursion-zero-bounded")
        });
        Ok(out)
    }

    /// For every budget step `t` and every observation `psi` that the
    /// optimal fixed `t-1` seeds can produce: seeding the reached set
    /// outright, plus the marginal-weighted gains of one extra seed,
    /// covers the optimal adaptive value.
    fn check_hybrid_dominance(&self) -> Result<LemmaCheck> {
        let opt_a = self.opt_adaptive_value();
        let mut tracker = SlackTracker::new();
        for t in 1..=self.k {
            let seeds = self.opt.seeds(t - 1);
            for (psi, _) in self.model.realized_restrictions(seeds) {
                let (support, mass) = self.model.consistent_support(&psi)?;
                let reached = psi.reached();
                let mut lhs = self.model.spread(reached);
                for (i, &xi) in self.x.x.iter().enumerate() {
                    if xi > 0.0 {
                        lhs += xi
                            * self
                                .model
                                .delta_on_support(i as u32, reached, &support, mass);
                    }
                }
                tracker.push(lhs - opt_a);
            }
        }
        Ok(tracker.finish("hybrid-dominance", true))
    }

    /// For every budget step and every live-edge graph (zero-probability
    /// ones included, the claim is structural): seeding the whole
    /// reached set is worth at most its size plus a class-specific
    /// allowance.
    fn check_reached_spread(
        &self,
        name: &str,
        allowance: impl Fn(u32, u32) -> Result<f64>,
    ) -> Result<LemmaCheck> {
        let mut tracker = SlackTracker::new();
        for t in 1..=self.k {
            let seeds = self.opt.seeds(t - 1);
            let extra = allowance(t - 1, self.k)?;
            for psi in self.model.all_restrictions(seeds) {
                let lhs = self.model.spread(psi.reached());
                let rhs = f64::from(psi.reached_count()) + extra;
                tracker.push(rhs - lhs);
            }
        }
        Ok(tracker.finish(name, true))
    }

    /// Spread scales at most linearly in the seed-set size beyond the
    /// optimal budget: for every set of h >= k nodes,
    /// `spread(U) <= (h/k) * OPT_N(k)`.
    fn check_subset_spread_scaling(&self) -> LemmaCheck {
        let n = self.g.n();
        let opt_k = self.opt.value(self.k);
        let mut tracker = SlackTracker::new();
        for bits in 0u64..(1 << n) {
            let u = NodeSet::from_bits(bits);
            let h = u.len();
            if h >= self.k {
                let rhs = f64::from(h) / f64::from(self.k) * opt_k;
                tracker.push(rhs - self.model.spread(u));
            }
        }
        tracker.finish("subset-spread-scaling", true)
    }

    /// Every union of at most k connected pieces (in the undirected
    /// view) has at most `alpha + 2k` nodes with an edge leaving it.
    fn check_boundary_count(&self, alpha: u32) -> Result<LemmaCheck> {
        let n = self.g.n();
        let cap = f64::from(alpha + 2 * self.k);
        let mut tracker = SlackTracker::new();
        for bits in 0u64..(1 << n) {
            let u = NodeSet::from_bits(bits);
            if induced_components(self.g, u)?.len() as u32 <= self.k {
                let boundary_size = boundary(self.g, u)?.len();
                tracker.push(cap - f64::from(boundary_size));
            }
        }
        Ok(tracker.finish("boundary-count", true))
    }

    /// The chain the gap bounds are built from: each non-adaptive
    /// optimum dominates a class-specific blend of the adaptive optimum
    /// and the previous non-adaptive optimum.
    fn check_recursion(&self, name: &str, rhs: impl Fn(f64, u32, f64) -> f64) -> LemmaCheck {
        let opt_a = self.opt_adaptive_value();
        let mut tracker = SlackTracker::new();
        for t in 1..=self.k {
            let lhs = self.opt.value(t);
            tracker.push(lhs - rhs(opt_a, self.k, self.opt.value(t - 1)));
        }
        tracker.finish(name, true)
    }
}

/// Measures `OPT_A / OPT_N` exactly and checks every applicable bound.
/// The `instance` label is left empty for the caller to fill.
pub fn measure_gap(g: &InfluenceGraph, k: u32, caps: Caps) -> Result<GapReport> {
    InstanceAnalysis::new(g, k, caps)?.gap_report()
}

/// Exhaustively verifies every applicable supporting inequality on one
/// instance.
pub fn verify_lemma_suite(g: &InfluenceGraph, k: u32, caps: Caps) -> Result<Vec<LemmaCheck>> {
    InstanceAnalysis::new(g, k, caps)?.lemma_suite()
}
