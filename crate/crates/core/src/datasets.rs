//! Bundled graphs so examples and checks run without downloads.

use nalgebra::DMatrix;
use rand::Rng;

use crate::graph::WeightedGraph;
use crate::io::edgelist::{read_edge_list, EdgeListOptions};
use crate::linalg::seeded_rng;

pub const KARATE_EDGE_LIST: &str = include_str!("../data/karate.txt");

/// Zachary's karate club: 34 nodes, 78 unit edges, labels "1".."34".
pub fn karate() -> WeightedGraph {
    read_edge_list(KARATE_EDGE_LIST.as_bytes(), EdgeListOptions::default()).expect("bundled edge list parses")
}

fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> WeightedGraph {
    let mut w = DMatrix::zeros(n, n);
    for &(a, b, x) in edges {
        w[(a, b)] += x;
        if a != b {
            w[(b, a)] += x;
        }
    }
    WeightedGraph::new(w).expect("square")
}

/// Two disjoint unit edges, `{0,1}` and `{2,3}`.
pub fn two_edges() -> WeightedGraph {
    from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)])
}

/// A single unit edge between two nodes.
pub fn single_edge() -> WeightedGraph {
    from_edges(2, &[(0, 1, 1.0)])
}

/// `count` cliques of `size` nodes joined in a ring by single edges.
pub fn ring_of_cliques(count: usize, size: usize) -> WeightedGraph {
    let n = count * size;
    let mut edges = Vec::new();
    for c in 0..count {
        let base = c * size;
        for a in 0..size {
            for b in a + 1..size {
                edges.push((base + a, base + b, 1.0));
            }
        }
        if count > 1 {
            let next = ((c + 1) % count) * size;
            edges.push((base + size - 1, next, 1.0));
        }
    }
    from_edges(n, &edges)
}

/// Two `size`-cliques joined by one bridge edge.
pub fn barbell(size: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for base in [0, size] {
        for a in 0..size {
            for b in a + 1..size {
                edges.push((base + a, base + b, 1.0));
            }
        }
    }
    edges.push((size - 1, size, 1.0));
    from_edges(2 * size, &edges)
}

/// Two disconnected random components of `size` nodes each. Every component
/// contains a spanning path plus each other pair with probability `p`; edge
/// weights are uniform on [0.5, 1.5).
pub fn two_component(size: usize, p: f64, seed: u64) -> WeightedGraph {
    let mut rng = seeded_rng(seed);
    let mut edges = Vec::new();
    for base in [0, size] {
        for a in 0..size {
            for b in a + 1..size {
                if b == a + 1 || rng.random_bool(p.clamp(0.0, 1.0)) {
                    edges.push((base + a, base + b, rng.random_range(0.5..1.5)));
                }
            }
        }
    }
    from_edges(2 * size, &edges)
}
