//! Whitespace-separated edge lists: `source target [weight]` per line,
//! `#` comment lines, blank lines ignored.
//!
//! Labels are indexed by first appearance. By default every record is an
//! undirected edge and repeated records accumulate. In directed mode each
//! record sets one direction only and the accumulated matrix must already be
//! symmetric.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{DhnError, Result};
use crate::graph::WeightedGraph;
use crate::linalg::Weights;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeListOptions {
    /// Treat records as directed and fail on asymmetric input.
    pub directed_reject: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRecord {
    pub source: String,
    pub target: String,
    pub weight: f64,
    pub line: usize,
}

/// Parses records without building a graph.
pub fn parse_records<R: BufRead>(input: R) -> Result<Vec<EdgeRecord>> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let weight = match tokens.len() {
            2 => 1.0,
            3 => tokens[2].parse::<f64>().ok().filter(|w| w.is_finite()).ok_or_else(|| DhnError::Parse {
                line: lineno,
                message: format!("weight {:?} is not a finite number", tokens[2]),
            })?,
            k => {
                return Err(DhnError::Parse {
                    line: lineno,
                    message: format!("expected 2 or 3 fields, found {k}"),
                })
            }
        };
        records.push(EdgeRecord {
            source: tokens[0].to_string(),
            target: tokens[1].to_string(),
            weight,
            line: lineno,
        });
    }
    Ok(records)
}

pub fn graph_from_records<'a>(records: &'a [EdgeRecord], opts: EdgeListOptions) -> Result<WeightedGraph> {
    if records.is_empty() {
        return Err(DhnError::Parse { line: 0, message: "edge list contains no edges".into() });
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut intern = |label: &'a str| -> usize {
        let next = labels.len();
        *index.entry(label).or_insert_with(|| {
            labels.push(label.to_string());
            next
        })
    };
    let mut triplets = Vec::with_capacity(records.len() * 2);
    for r in records {
        let (u, v) = (intern(&r.source), intern(&r.target));
        triplets.push((u, v, r.weight));
        if !opts.directed_reject && u != v {
            triplets.push((v, u, r.weight));
        }
    }
    let n = labels.len();
    let weights = Weights::from_triplets(n, triplets)?;
    if opts.directed_reject {
        if let Some((i, j)) = weights.asymmetry() {
            return Err(DhnError::Parse {
                line: 0,
                message: format!(
                    "asymmetric input: weight {} -> {} is {} but {} -> {} is {}",
                    labels[i],
                    labels[j],
                    weights.get(i, j),
                    labels[j],
                    labels[i],
                    weights.get(j, i)
                ),
            });
        }
    }
    WeightedGraph::from_weights(weights).with_labels(labels)
}

pub fn read_edge_list<R: Read>(input: R, opts: EdgeListOptions) -> Result<WeightedGraph> {
    graph_from_records(&parse_records(BufReader::new(input))?, opts)
}

pub fn load_edge_list(path: impl AsRef<Path>, opts: EdgeListOptions) -> Result<WeightedGraph> {
    read_edge_list(File::open(path)?, opts)
}

/// Writes `source target weight` for every stored entry with `i <= j`.
pub fn write_edge_list<W: std::io::Write>(out: &mut W, g: &WeightedGraph) -> Result<()> {
    for i in 0..g.n() {
        for (j, w) in g.weights().row(i) {
            if i <= j {
                writeln!(out, "{} {} {}", g.label(i), g.label(j), w)?;
            }
        }
    }
    Ok(())
}
