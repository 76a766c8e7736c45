//! Plain-text graph files.
//!
//! ```text
//! # comment
//! directed
//! 3
//! 0 1 0.5
//! 1 2 0.25
//! ```
//!
//! Line 1 is `directed` or `undirected`, line 2 the node count, then one
//! edge per line. Directed lines are `u v p`; undirected lines are
//! `u v p_uv p_vu` with the second probability defaulting to the first.
//! `#` starts a comment anywhere on a line.

use std::path::Path;

use super::InfluenceGraph;
use crate::error::{Error, Result};

pub fn parse_graph(text: &str) -> Result<InfluenceGraph> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            None
        } else {
            Some((i + 1, body))
        }
    });

    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file, expected 'directed' or 'undirected'"))?;
    let directed = match header {
        "directed" => true,
        "undirected" => false,
        other => {
            return Err(parse_err(
                line,
                &format!("expected 'directed' or 'undirected', got '{other}'"),
            ))
        }
    };

    let (line, count) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing node count"))?;
    let n: u32 = count
        .parse()
        .map_err(|_| parse_err(line, &format!("node count '{count}' is not an integer")))?;

    let mut directed_edges = Vec::new();
    let mut undirected_pairs = Vec::new();
    for (line, body) in lines {
        let fields: Vec<&str> = body.split_whitespace().collect();
        let arity_ok = if directed {
            fields.len() == 3
        } else {
            fields.len() == 3 || fields.len() == 4
        };
        if !arity_ok {
            return Err(parse_err(
                line,
                &format!(
                    "expected '{}', got {} fields",
                    if directed { "u v p" } else { "u v p_uv [p_vu]" },
                    fields.len()
                ),
            ));
        }
        let u = parse_node(fields[0], line)?;
        let v = parse_node(fields[1], line)?;
        let p = parse_prob(fields[2], line)?;
        if u >= n || v >= n {
            return Err(parse_err(
                line,
                &format!("edge {u} -> {v} references a node >= {n}"),
            ));
        }
        if directed {
            directed_edges.push((u, v, p));
        } else {
            let q = if fields.len() == 4 {
                parse_prob(fields[3], line)?
            } else {
                p
            };
            undirected_pairs.push((u, v, p, q));
        }
    }

    if directed {
        InfluenceGraph::from_directed_edges(n, &directed_edges)
    } else {
        InfluenceGraph::from_undirected_edges(n, &undirected_pairs)
    }
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<InfluenceGraph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

/// Canonical text form; `parse_graph(&write_graph(&g))` reproduces `g`
/// exactly (probabilities print in shortest round-trip form).
pub fn write_graph(g: &InfluenceGraph) -> String {
    let mut out = String::new();
    if g.directed() {
        out.push_str("directed\n");
        out.push_str(&format!("{}\n", g.n()));
        for e in g.edges() {
            out.push_str(&format!("{} {} {}\n", e.src, e.dst, e.prob));
        }
    } else {
        out.push_str("undirected\n");
        out.push_str(&format!("{}\n", g.n()));
        // Undirected construction stores each pair as two adjacent
        // directed edges, so walk them two at a time.
        for pair in g.edges().chunks(2) {
            let (fwd, rev) = (&pair[0], &pair[1]);
            debug_assert_eq!((fwd.src, fwd.dst), (rev.dst, rev.src));
            out.push_str(&format!(
                "{} {} {} {}\n",
                fwd.src, fwd.dst, fwd.prob, rev.prob
            ));
        }
    }
    out
}

pub fn save_graph(g: &InfluenceGraph, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, write_graph(g))?)
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn parse_node(field: &str, line: usize) -> Result<u32> {
    field
        .parse()
        .map_err(|_| parse_err(line, &format!("node id '{field}' is not an integer")))
}

fn parse_prob(field: &str, line: usize) -> Result<f64> {
    let p: f64 = field
        .parse()
        .map_err(|_| parse_err(line, &format!("probability '{field}' is not a number")))?;
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(parse_err(
            line,
            &format!("probability {p} is outside [0, 1]"),
        ));
    }
    Ok(p)
}
