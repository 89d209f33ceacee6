//! Cleora-style embedding propagation: the network `(W, 0, F)` with row-wise
//! l2 normalization `F`, run in parallel mode from uniform random states.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{DhnError, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{seeded_rng, uniform_matrix};

/// Rows with a smaller norm are treated as zero.
pub const ZERO_ROW_NORM: f64 = 1e-300;

pub const DEFAULT_ITERATIONS: usize = 3;

/// Node embeddings, one row per node.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix(pub DMatrix<f64>);

impl EmbeddingMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

/// `x / ‖x‖₂`, with zero (or sub-[`ZERO_ROW_NORM`]) rows mapped to zero.
pub fn normalize_row_in_place(row: &mut [f64]) {
    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < ZERO_ROW_NORM || !norm.is_finite() {
        row.iter_mut().for_each(|v| *v = 0.0);
    } else {
        row.iter_mut().for_each(|v| *v /= norm);
    }
}

pub fn l2_normalize_rows(m: &DMatrix<f64>) -> EmbeddingMatrix {
    let mut out = m.clone();
    let mut buf = vec![0.0; m.ncols()];
    for i in 0..m.nrows() {
        buf.iter_mut().zip(m.row(i).iter()).for_each(|(b, v)| *b = *v);
        normalize_row_in_place(&mut buf);
        for (c, v) in buf.iter().enumerate() {
            out[(i, c)] = *v;
        }
    }
    EmbeddingMatrix(out)
}

/// Seeded initial embedding with i.i.d. entries on (-1, 1).
pub fn cleora_initial_state(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
    uniform_matrix(n, d, &mut seeded_rng(seed))
}

/// `iters` rounds of `X ← normalize_rows(W·X)` on the raw weight matrix.
pub fn run_cleora(g: &WeightedGraph, d: usize, iters: usize, seed: u64) -> Result<EmbeddingMatrix> {
    if d == 0 {
        return Err(DhnError::invalid("embedding dimension must be at least 1"));
    }
    let mut x = cleora_initial_state(g.n(), d, seed);
    for _ in 0..iters {
        x = l2_normalize_rows(&g.weights().mul(&x)).into_matrix();
    }
    Ok(EmbeddingMatrix(x))
}

/// One line per node: label, then `d` values with 17 significant digits.
pub fn write_embedding<W: Write>(out: &mut W, g: &WeightedGraph, emb: &EmbeddingMatrix) -> Result<()> {
    for i in 0..emb.0.nrows() {
        write!(out, "{}", g.label(i))?;
        for v in emb.0.row(i).iter() {
            write!(out, " {v:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Inverse of [`write_embedding`]: labels in file order and the matrix.
pub fn read_embedding<R: BufRead>(input: R) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let mut tokens = line.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        let row = tokens
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| DhnError::Parse { line: idx + 1, message: e.to_string() })?;
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(DhnError::Parse { line: idx + 1, message: "ragged embedding row".into() });
        }
        labels.push(label.to_string());
        values.extend(row);
    }
    let d = width.unwrap_or(0);
    Ok((labels.clone(), DMatrix::from_row_slice(labels.len(), d, &values)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    #[test]
    fn normalize_examples() {
        let m = DMatrix::from_row_slice(3, 2, &[3.0, 4.0, 0.0, 0.0, 0.6, 0.8]);
        let e = l2_normalize_rows(&m).into_matrix();
        assert!((e[(0, 0)] - 0.6).abs() < 1e-16 && (e[(0, 1)] - 0.8).abs() < 1e-16);
        assert_eq!(e.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
        assert!((e.row(2) - m.row(2)).norm() < 1e-16);
        let tiny = DMatrix::from_row_slice(1, 2, &[1e-310, 0.0]);
        assert_eq!(l2_normalize_rows(&tiny).into_matrix(), DMatrix::zeros(1, 2));
    }

    #[test]
    fn zero_iterations_return_initial_state() {
        let g = datasets::karate();
        let e = run_cleora(&g, 8, 0, 5).unwrap().into_matrix();
        assert_eq!(e, cleora_initial_state(34, 8, 5));
        assert!(e.iter().all(|&v| v > -1.0 && v < 1.0));
    }

    #[test]
    fn swap_graph_returns_normalized_start_after_two_rounds() {
        let g = WeightedGraph::symmetric(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let x0 = cleora_initial_state(2, 3, 17);
        let e = run_cleora(&g, 3, 2, 17).unwrap().into_matrix();
        assert!((e - l2_normalize_rows(&x0).into_matrix()).norm() < 1e-15);
    }

    #[test]
    fn rows_are_unit_or_zero() {
        let g = datasets::karate();
        for iters in 1..4 {
            let e = run_cleora(&g, 5, iters, 2).unwrap().into_matrix();
            for i in 0..e.nrows() {
                let n = e.row(i).norm();
                assert!(n == 0.0 || (n - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn export_round_trip() {
        let g = datasets::karate();
        let e = run_cleora(&g, 4, 3, 8).unwrap();
        let mut buf = Vec::new();
        write_embedding(&mut buf, &g, &e).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first.split(' ').count(), 5);
        let (labels, m) = read_embedding(&buf[..]).unwrap();
        assert_eq!(labels[0], "1");
        assert_eq!(&m, e.matrix());
    }
}
