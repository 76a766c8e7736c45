//! Command-line front end: instance generation, spread queries, oracle
//! runs, gap measurement, bound sweeps, and the verification suite.
//!
//! JSON is the canonical output format; CSV is a lossy projection for
//! spreadsheet handoff. Reports carry no timestamps, so identical
//! arguments produce byte-identical output at any worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use adgap::diffusion::{spread_exact, spread_mc};
use adgap::gaps::{
    bound_alpha, bound_alpha_closed_form, bound_in_arborescence, bound_reference_general,
    bound_zero_bounded, measure_gap,
};
use adgap::graph::{generate, load_graph, write_graph, GeneratorSpec, ProbRule};
use adgap::harness::{check_rows, run_suite, suite_csv, SuiteKind, SuiteSpec, CHECK_CSV_HEADER};
use adgap::policies::{
    marginals, opt_adaptive, opt_nonadaptive, MarginalVector, NonAdaptiveOptimum, PolicyTree,
};
use adgap::{Caps, NodeSet};

#[derive(Parser)]
#[command(
    name = "adgap",
    version,
    about = "Exact small-instance influence maximization and adaptivity-gap verification"
)]
struct Cli {
    /// Master seed for generators and Monte Carlo sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for instance-parallel commands (0 = automatic).
    /// Results are merged in a fixed order, so the count never changes
    /// the output.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Cap on exhaustive live-edge enumeration: exact operations refuse
    /// graphs with more than this many edges.
    #[arg(long, global = true, default_value_t = 20)]
    max_edges: u32,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format. `gen` always writes the graph file format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it in the graph file format.
    Gen {
        #[command(subcommand)]
        shape: Shape,
    },
    /// Expected number of nodes reached by a seed set.
    Spread {
        /// Graph file.
        graph: PathBuf,
        /// Comma-separated seed node ids (omit for the empty set).
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u32>,
        /// Exact expectation over all live-edge graphs (the default).
        #[arg(long, conflicts_with = "samples")]
        exact: bool,
        /// Monte Carlo estimate with this many samples.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Exact optimal policies: non-adaptive seed sets per budget and
    /// the optimal adaptive decision tree with its marginals.
    Opt {
        /// Graph file.
        graph: PathBuf,
        /// Seed budget.
        #[arg(short)]
        k: u32,
        /// Which oracle to run.
        #[arg(long, value_enum, default_value_t = Oracle::Both)]
        policy: Oracle,
    },
    /// Measure the adaptivity gap and check every applicable bound.
    Gap {
        /// Graph file.
        graph: PathBuf,
        /// Seed budget.
        #[arg(short)]
        k: u32,
    },
    /// Run the verification suite; exits nonzero if any check fails.
    Verify {
        /// Suite to run: smoke or default.
        #[arg(long, default_value = "default")]
        suite: String,
        /// Keep only instances of one family (e.g. in-arborescence).
        #[arg(long)]
        filter: Option<String>,
        /// Corrupt one bound on purpose; a healthy harness must then
        /// exit nonzero.
        #[arg(long)]
        self_test: bool,
    },
    /// Tabulate a closed-form bound over a parameter range.
    Sweep {
        /// Bound to tabulate.
        #[arg(long, value_enum)]
        bound: SweepBound,
        #[arg(long, default_value_t = 2)]
        k_min: u32,
        #[arg(long, default_value_t = 100)]
        k_max: u32,
        /// Degree-mass range (alpha-bounded sweeps only).
        #[arg(long, default_value_t = 0)]
        alpha_min: u32,
        #[arg(long, default_value_t = 20)]
        alpha_max: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Oracle {
    Adaptive,
    Nonadaptive,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepBound {
    InArborescence,
    ZeroBounded,
    AlphaBounded,
}

#[derive(Args)]
struct ProbArgs {
    /// Constant edge probability.
    #[arg(long, default_value_t = 0.5, conflicts_with = "p_range")]
    p: f64,

    /// Uniform edge-probability range, drawn per directed edge.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    p_range: Option<Vec<f64>>,
}

impl ProbArgs {
    fn rule(&self) -> ProbRule {
        match self.p_range.as_deref() {
            Some([lo, hi]) => ProbRule::Uniform { lo: *lo, hi: *hi },
            _ => ProbRule::Constant(self.p),
        }
    }
}

#[derive(Subcommand)]
enum Shape {
    /// Random tree with every edge pointing toward node 0.
    #[command(name = "in-arborescence", alias = "in-arb")]
    InArborescence {
        n: u32,
        #[command(flatten)]
        prob: ProbArgs,
    },
    /// Random tree with every edge pointing away from node 0.
    #[command(name = "out-arborescence", alias = "out-arb")]
    OutArborescence {
        n: u32,
        #[command(flatten)]
        prob: ProbArgs,
    },
    /// Undirected path.
    Path {
        n: u32,
        #[command(flatten)]
        prob: ProbArgs,
    },
    /// Undirected cycle (needs at least 3 nodes).
    Cycle {
        n: u32,
        #[command(flatten)]
        prob: ProbArgs,
    },
    /// Directed complete bipartite graph, all edges left to right.
    Bipartite {
        left: u32,
        right: u32,
        #[command(flatten)]
        prob: ProbArgs,
    },
    /// Undirected star with each ray subdivided into a path.
    StarSubdivision {
        rays: u32,
        segment: u32,
        #[command(flatten)]
        prob: ProbArgs,
    },
    /// Two hubs joined by disjoint undirected paths.
    ParallelLinks {
        links: u32,
        segment: u32,
        #[command(flatten)]
        prob: ProbArgs,
    },
    /// Uniformly random simple digraph with exactly m edges.
    Random {
        n: u32,
        m: u32,
        #[command(flatten)]
        prob: ProbArgs,
    },
}

impl Shape {
    fn spec_and_rule(&self) -> (GeneratorSpec, ProbRule) {
        match self {
            Shape::InArborescence { n, prob } => {
                (GeneratorSpec::InArborescence { n: *n }, prob.rule())
            }
            Shape::OutArborescence { n, prob } => {
                (GeneratorSpec::OutArborescence { n: *n }, prob.rule())
            }
            Shape::Path { n, prob } => (GeneratorSpec::Path { n: *n }, prob.rule()),
            Shape::Cycle { n, prob } => (GeneratorSpec::Cycle { n: *n }, prob.rule()),
            Shape::Bipartite { left, right, prob } => (
                GeneratorSpec::OneDirectionalBipartite {
                    left: *left,
                    right: *right,
                },
                prob.rule(),
            ),
            Shape::StarSubdivision {
                rays,
                segment,
                prob,
            } => (
                GeneratorSpec::StarSubdivision {
                    rays: *rays,
                    segment: *segment,
                },
                prob.rule(),
            ),
            Shape::ParallelLinks {
                links,
                segment,
                prob,
            } => (
                GeneratorSpec::ParallelLinks {
                    links: *links,
                    segment: *segment,
                },
                prob.rule(),
            ),
            Shape::Random { n, m, prob } => {
                (GeneratorSpec::RandomDigraph { n: *n, m: *m }, prob.rule())
            }
        }
    }
}

#[derive(Serialize)]
struct SpreadReport {
    graph: String,
    seeds: Vec<u32>,
    mode: &'static str,
    value: f64,
    stderr: Option<f64>,
    samples: Option<u64>,
}

#[derive(Serialize)]
struct OptReport {
    graph: String,
    k: u32,
    nonadaptive: Option<NonAdaptiveOptimum>,
    adaptive: Option<PolicyTree>,
    marginals: Option<MarginalVector>,
}

#[derive(Serialize)]
struct SweepRow {
    bound: &'static str,
    k: u32,
    alpha: Option<u32>,
    value: f64,
    closed_form: Option<f64>,
    reference: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let caps = Caps::with_max_edges(cli.max_edges);
    match &cli.command {
        Command::Gen { shape } => {
            let (spec, rule) = shape.spec_and_rule();
            let g = generate(spec, rule, cli.seed)?;
            emit(&cli.out, &write_graph(&g))?;
            eprintln!("generated {spec}: n={}, m={}", g.n(), g.m());
            Ok(ExitCode::SUCCESS)
        }
        Command::Spread {
            graph,
            seeds,
            samples,
            ..
        } => {
            let g = load_graph(graph)?;
            let seed_set = NodeSet::from_ids(seeds);
            let report = match samples {
                None => SpreadReport {
                    graph: graph.display().to_string(),
                    seeds: seeds.clone(),
                    mode: "exact",
                    value: spread_exact(&g, seed_set, caps)?,
                    stderr: None,
                    samples: None,
                },
                Some(samples) => {
                    let est = spread_mc(&g, seed_set, *samples, cli.seed)?;
                    SpreadReport {
                        graph: graph.display().to_string(),
                        seeds: seeds.clone(),
                        mode: "mc",
                        value: est.mean,
                        stderr: Some(est.stderr),
                        samples: Some(est.samples),
                    }
                }
            };
            let rendered = match cli.format {
                Format::Json => pretty_json(&report)?,
                Format::Csv => {
                    let mut s = String::from("mode,value,stderr,samples\n");
                    writeln!(
                        s,
                        "{},{},{},{}",
                        report.mode,
                        report.value,
                        report.stderr.map_or(String::new(), |v| v.to_string()),
                        report.samples.map_or(String::new(), |v| v.to_string())
                    )?;
                    s
                }
            };
            emit(&cli.out, &rendered)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Opt { graph, k, policy } => {
            let g = load_graph(graph)?;
            let nonadaptive = match policy {
                Oracle::Adaptive => None,
                _ => Some(opt_nonadaptive(&g, *k, caps)?),
            };
            let (adaptive, x) = match policy {
                Oracle::Nonadaptive => (None, None),
                _ => {
                    let tree = opt_adaptive(&g, *k, caps)?;
                    let x = marginals(&tree)?;
                    (Some(tree), Some(x))
                }
            };
            let report = OptReport {
                graph: graph.display().to_string(),
                k: *k,
                nonadaptive,
                adaptive,
                marginals: x,
            };
            let rendered = match cli.format {
                Format::Json => pretty_json(&report)?,
                Format::Csv => opt_csv(&report),
            };
            emit(&cli.out, &rendered)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gap { graph, k } => {
            let g = load_graph(graph)?;
            let mut report = measure_gap(&g, *k, caps)?;
            report.instance = graph.display().to_string();
            let rendered = match cli.format {
                Format::Json => pretty_json(&report)?,
                Format::Csv => {
                    let mut s = String::from(CHECK_CSV_HEADER);
                    s.push('\n');
                    for row in check_rows(&report, &[]) {
                        s.push_str(&row);
                        s.push('\n');
                    }
                    s
                }
            };
            emit(&cli.out, &rendered)?;
            eprintln!(
                "ratio {:.6} over {} bound checks, all pass: {}",
                report.ratio,
                report.checks.len(),
                report.all_pass()
            );
            Ok(if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Verify {
            suite,
            filter,
            self_test,
        } => {
            let spec = SuiteSpec {
                kind: suite.parse::<SuiteKind>()?,
                filter: filter.clone(),
                self_test: *self_test,
            };
            let report = run_suite(&spec, caps)?;
            let rendered = match cli.format {
                Format::Json => pretty_json(&report)?,
                Format::Csv => suite_csv(&report),
            };
            emit(&cli.out, &rendered)?;
            eprintln!(
                "suite {}: {} instances, {} failed",
                report.suite, report.summary.instances, report.summary.failed
            );
            Ok(if report.summary.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Sweep {
            bound,
            k_min,
            k_max,
            alpha_min,
            alpha_max,
        } => {
            let rows = sweep_rows(*bound, *k_min, *k_max, *alpha_min, *alpha_max)?;
            let rendered = match cli.format {
                Format::Json => pretty_json(&rows)?,
                Format::Csv => {
                    let mut s = String::from("bound,k,alpha,value,closed_form,reference\n");
                    for r in &rows {
                        writeln!(
                            s,
                            "{},{},{},{},{},{}",
                            r.bound,
                            r.k,
                            r.alpha.map_or(String::new(), |v| v.to_string()),
                            r.value,
                            r.closed_form.map_or(String::new(), |v| v.to_string()),
                            r.reference
                        )?;
                    }
                    s
                }
            };
            emit(&cli.out, &rendered)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn sweep_rows(
    bound: SweepBound,
    k_min: u32,
    k_max: u32,
    alpha_min: u32,
    alpha_max: u32,
) -> anyhow::Result<Vec<SweepRow>> {
    if k_min > k_max || alpha_min > alpha_max {
        anyhow::bail!("empty sweep range");
    }
    let reference = bound_reference_general();
    let mut rows = Vec::new();
    for k in k_min..=k_max {
        match bound {
            SweepBound::InArborescence => rows.push(SweepRow {
                bound: "in-arborescence",
                k,
                alpha: None,
                value: bound_in_arborescence(k)?,
                closed_form: None,
                reference,
            }),
            SweepBound::ZeroBounded => rows.push(SweepRow {
                bound: "zero-bounded",
                k,
                alpha: None,
                value: bound_zero_bounded(k)?,
                closed_form: None,
                reference,
            }),
            SweepBound::AlphaBounded => {
                for alpha in alpha_min..=alpha_max {
                    rows.push(SweepRow {
                        bound: "alpha-bounded",
                        k,
                        alpha: Some(alpha),
                        value: bound_alpha(alpha, k)?,
                        closed_form: Some(bound_alpha_closed_form(alpha)),
                        reference,
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn opt_csv(report: &OptReport) -> String {
    let mut s = String::from("kind,index,value,nodes\n");
    if let Some(opt) = &report.nonadaptive {
        for (t, b) in opt.per_budget.iter().enumerate() {
            let nodes: Vec<String> = b.seeds.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "nonadaptive,{t},{},{}", b.value, nodes.join(";"));
        }
    }
    if let Some(tree) = &report.adaptive {
        let _ = writeln!(s, "adaptive,{},{},", tree.budget, tree.value());
    }
    if let Some(x) = &report.marginals {
        for (i, xi) in x.x.iter().enumerate() {
            let _ = writeln!(s, "marginal,{i},{xi},");
        }
    }
    s
}

fn pretty_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn emit(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}
