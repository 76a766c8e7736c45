//! The verification suite: a fixed catalog of small instances, gap and
//! inequality checks for each, and deterministic aggregation.
//!
//! Instances are dispatched to worker threads whole, each is analyzed
//! single-threadedly, and results are merged in instance-id order, so a
//! suite run serializes to the same bytes at any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::{suite_passes, GapReport, InstanceAnalysis, LemmaCheck};
use crate::graph::{generate, GeneratorSpec, GraphClassReport, InfluenceGraph, ProbRule};
use crate::Caps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    /// A handful of instances, for quick end-to-end checks.
    Smoke,
    /// The full catalog: every graph-class family plus a large block of
    /// random digraphs.
    Default,
}

impl SuiteKind {
    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Smoke => "smoke",
            SuiteKind::Default => "default",
        }
    }
}

impl std::str::FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(SuiteKind::Smoke),
            "default" => Ok(SuiteKind::Default),
            other => Err(Error::InvalidInput(format!(
                "unknown suite {other:?}, expected smoke or default"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteSpec {
    pub kind: SuiteKind,
    /// Keep only instances of one family (exact match on the family
    /// label, e.g. "in-arborescence").
    pub filter: Option<String>,
    /// Corrupt the first instance's budget-bound value to 0.9, below
    /// any achievable ratio, so a healthy harness must report failure.
    pub self_test: bool,
}

impl SuiteSpec {
    pub fn new(kind: SuiteKind) -> Self {
        SuiteSpec {
            kind,
            filter: None,
            self_test: false,
        }
    }
}

/// How one suite instance is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceKind {
    Generated {
        spec: GeneratorSpec,
        prob: ProbRule,
        seed: u64,
    },
    /// Directed path `0 -> 1 -> ... -> n-1`, every edge probability
    /// one half: the family with a known adaptivity gap of 13/12 at
    /// n = 4, k = 2.
    WitnessPath { n: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub id: String,
    pub family: &'static str,
    pub kind: InstanceKind,
    pub k: u32,
}

impl InstanceSpec {
    pub fn build(&self) -> Result<InfluenceGraph> {
        match self.kind {
            InstanceKind::Generated { spec, prob, seed } => generate(spec, prob, seed),
            InstanceKind::WitnessPath { n } => {
                let edges: Vec<(u32, u32, f64)> = (1..n).map(|i| (i - 1, i, 0.5)).collect();
                InfluenceGraph::from_directed_edges(n, &edges)
            }
        }
    }
}

fn prob_label(prob: ProbRule) -> String {
    match prob {
        ProbRule::Constant(p) => format!("p{p}"),
        ProbRule::Uniform { lo, hi } => format!("p{lo}..{hi}"),
    }
}

struct Catalog {
    next: usize,
    out: Vec<InstanceSpec>,
}

impl Catalog {
    fn new() -> Self {
        Catalog {
            next: 0,
            out: Vec::new(),
        }
    }

    fn generated(
        &mut self,
        family: &'static str,
        spec: GeneratorSpec,
        prob: ProbRule,
        seed: u64,
        k: u32,
    ) {
        // Two-parameter specs print as "name(a,b)"; keep ids comma-free
        // so CSV rows stay seven plain fields.
        let shape = spec.to_string().replace(',', "x");
        let id = format!("{:03}-{shape}-{}-k{k}-s{seed}", self.next, prob_label(prob));
        self.next += 1;
        self.out.push(InstanceSpec {
            id,
            family,
            kind: InstanceKind::Generated { spec, prob, seed },
            k,
        });
    }

    fn witness(&mut self, n: u32, k: u32) {
        let id = format!("{:03}-witness-path({n})-p0.5-k{k}", self.next);
        self.next += 1;
        self.out.push(InstanceSpec {
            id,
            family: "witness-path",
            kind: InstanceKind::WitnessPath { n },
            k,
        });
    }
}

fn default_instances() -> Vec<InstanceSpec> {
    let mut c = Catalog::new();
    for n in [4u32, 5, 6] {
        for m in [6u32, 8, 10] {
            for p in [0.3, 0.5, 1.0] {
                for k in [2u32, 3] {
                    for seed in 0..4u64 {
                        c.generated(
                            "random",
                            GeneratorSpec::RandomDigraph { n, m },
                            ProbRule::Constant(p),
                            seed,
                            k,
                        );
                    }
                }
            }
        }
    }
    for n in [4u32, 5, 6, 7] {
        for k in [2u32, 3] {
            for seed in [1u64, 2] {
                c.generated(
                    "in-arborescence",
                    GeneratorSpec::InArborescence { n },
                    ProbRule::Constant(0.5),
                    seed,
                    k,
                );
            }
        }
    }
    c.generated(
        "in-arborescence",
        GeneratorSpec::InArborescence { n: 5 },
        ProbRule::Constant(1.0),
        1,
        2,
    );
    c.generated(
        "in-arborescence",
        GeneratorSpec::InArborescence { n: 6 },
        ProbRule::Uniform { lo: 0.2, hi: 0.9 },
        3,
        2,
    );
    for n in [5u32, 6] {
        c.generated(
            "out-arborescence",
            GeneratorSpec::OutArborescence { n },
            ProbRule::Constant(0.5),
            1,
            2,
        );
    }
    for n in [4u32, 5, 6, 7] {
        for k in [2u32, 3] {
            c.generated(
                "path",
                GeneratorSpec::Path { n },
                ProbRule::Constant(0.5),
                1,
                k,
            );
            c.generated(
                "cycle",
                GeneratorSpec::Cycle { n },
                ProbRule::Constant(0.5),
                1,
                k,
            );
        }
    }
    for (rays, segment) in [(3u32, 1u32), (3, 2)] {
        for k in [2u32, 3] {
            c.generated(
                "star-subdivision",
                GeneratorSpec::StarSubdivision { rays, segment },
                ProbRule::Constant(0.5),
                1,
                k,
            );
        }
    }
    for k in [2u32, 3] {
        c.generated(
            "parallel-links",
            GeneratorSpec::ParallelLinks {
                links: 3,
                segment: 2,
            },
            ProbRule::Constant(0.5),
            1,
            k,
        );
    }
    for (left, right) in [(2u32, 3u32), (3, 3)] {
        c.generated(
            "one-directional-bipartite",
            GeneratorSpec::OneDirectionalBipartite { left, right },
            ProbRule::Constant(0.5),
            1,
            2,
        );
    }
    for n in [4u32, 5, 6] {
        c.witness(n, 2);
    }
    c.out
}

fn smoke_instances() -> Vec<InstanceSpec> {
    let mut c = Catalog::new();
    c.witness(4, 2);
    c.generated(
        "random",
        GeneratorSpec::RandomDigraph { n: 5, m: 8 },
        ProbRule::Constant(0.5),
        1,
        2,
    );
    c.generated(
        "path",
        GeneratorSpec::Path { n: 5 },
        ProbRule::Constant(0.5),
        1,
        2,
    );
    c.generated(
        "in-arborescence",
        GeneratorSpec::InArborescence { n: 5 },
        ProbRule::Constant(0.5),
        3,
        2,
    );
    c.out
}

/// The instance catalog for a suite, ids assigned before filtering so
/// an instance keeps its id under any filter.
pub fn suite_instances(spec: &SuiteSpec) -> Vec<InstanceSpec> {
    let all = match spec.kind {
        SuiteKind::Smoke => smoke_instances(),
        SuiteKind::Default => default_instances(),
    };
    match &spec.filter {
        None => all,
        Some(f) => all.into_iter().filter(|i| i.family == f).collect(),
    }
}

/// Gap report and inequality checks for one suite instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub id: String,
    pub family: String,
    pub n: u32,
    pub m: u32,
    pub k: u32,
    pub gap: GapReport,
    pub lemmas: Vec<LemmaCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub instances: u64,
    pub passed: u64,
    pub failed: u64,
    pub gap_checks: u64,
    pub lemma_comparisons: u64,
    pub max_ratio: f64,
    pub min_lemma_slack: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub filter: Option<String>,
    pub self_test: bool,
    pub summary: SuiteSummary,
    pub instances: Vec<InstanceResult>,
}

fn analyze_instance(spec: &InstanceSpec, caps: Caps) -> Result<InstanceResult> {
    let g = spec.build()?;
    let analysis = InstanceAnalysis::new(&g, spec.k, caps)?;
    let mut gap = analysis.gap_report()?;
    gap.instance = spec.id.clone();
    let lemmas = analysis.lemma_suite()?;
    let pass = gap.all_pass() && suite_passes(&lemmas);
    Ok(InstanceResult {
        id: spec.id.clone(),
        family: spec.family.to_string(),
        n: g.n(),
        m: g.m(),
        k: spec.k,
        gap,
        lemmas,
        pass,
    })
}

/// Runs every instance of the suite (in parallel when a rayon pool with
/// more than one thread is installed) and aggregates the results.
pub fn run_suite(spec: &SuiteSpec, caps: Caps) -> Result<SuiteReport> {
    let instances = suite_instances(spec);
    let mut results: Vec<InstanceResult> = instances
        .par_iter()
        .map(|i| analyze_instance(i, caps))
        .collect::<Result<_>>()?;
    if spec.self_test {
        if let Some(first) = results.first_mut() {
            if let Some(check) = first.gap.checks.iter_mut().find(|c| c.bound == "budget") {
                check.value = 0.9;
                check.slack = check.value - first.gap.ratio;
                check.pass = first.gap.ratio <= check.value + 1e-7;
            }
            first.pass = first.gap.all_pass() && suite_passes(&first.lemmas);
        }
    }
    let passed = results.iter().filter(|r| r.pass).count() as u64;
    let failed = results.len() as u64 - passed;
    let gap_checks = results.iter().map(|r| r.gap.checks.len() as u64).sum();
    let lemma_comparisons = results
        .iter()
        .flat_map(|r| &r.lemmas)
        .map(|l| l.instances)
        .sum();
    let max_ratio = results
        .iter()
        .map(|r| r.gap.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_lemma_slack = results
        .iter()
        .flat_map(|r| &r.lemmas)
        .filter_map(|l| l.min_slack)
        .fold(None, |acc: Option<f64>, s| {
            Some(acc.map_or(s, |a| a.min(s)))
        });
    let summary = SuiteSummary {
        instances: results.len() as u64,
        passed,
        failed,
        gap_checks,
        lemma_comparisons,
        max_ratio,
        min_lemma_slack,
        pass: failed == 0 && !results.is_empty(),
    };
    Ok(SuiteReport {
        suite: spec.kind.name().to_string(),
        filter: spec.filter.clone(),
        self_test: spec.self_test,
        summary,
        instances: results,
    })
}

/// Short class tag for CSV rows, e.g. "in-arborescence;alpha=0;zero-bounded".
pub fn class_label(class: &GraphClassReport) -> String {
    let mut tags = Vec::new();
    if class.is_in_arborescence {
        tags.push("in-arborescence".to_string());
    }
    if class.is_out_arborescence {
        tags.push("out-arborescence".to_string());
    }
    if class.is_one_directional_bipartite {
        tags.push("one-directional-bipartite".to_string());
    }
    if let Some(alpha) = class.min_alpha {
        tags.push(format!("alpha={alpha}"));
    }
    if class.is_zero_bounded {
        tags.push("zero-bounded".to_string());
    }
    if tags.is_empty() {
        tags.push("general".to_string());
    }
    tags.join(";")
}

pub const CHECK_CSV_HEADER: &str = "instance,class,k,check,value,slack,pass";

/// One CSV row per bound check and per inequality check of a gap
/// report. Inequality rows leave the value column empty and put the
/// worst slack in the slack column.
pub fn check_rows(gap: &GapReport, lemmas: &[LemmaCheck]) -> Vec<String> {
    let class = class_label(&gap.class);
    let mut rows = Vec::new();
    for c in &gap.checks {
        rows.push(format!(
            "{},{},{},{},{},{},{}",
            gap.instance, class, gap.k, c.bound, c.value, c.slack, c.pass
        ));
    }
    for l in lemmas {
        if l.applicable {
            let slack = l.min_slack.map_or(String::new(), |s| s.to_string());
            rows.push(format!(
                "{},{},{},{},,{},{}",
                gap.instance, class, gap.k, l.check, slack, l.pass
            ));
        }
    }
    rows
}

pub fn suite_csv(report: &SuiteReport) -> String {
    let mut out = String::from(CHECK_CSV_HEADER);
    out.push('\n');
    for r in &report.instances {
        for row in check_rows(&r.gap, &r.lemmas) {
            out.push_str(&row);
            out.push('\n');
        }
    }
    out
}
