#![allow(dead_code)]

use dhn::clustering::ClusteringMatrix;
use dhn::WeightedGraph;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Symmetric matrix with off-diagonal entries on (-1, 1) and diagonal on [0, diag_max).
pub fn symmetric_weights<R: Rng>(rng: &mut R, n: usize, diag_max: f64) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        w[(i, i)] = if diag_max > 0.0 { rng.random_range(0.0..diag_max) } else { 0.0 };
        for j in i + 1..n {
            let v = rng.random_range(-1.0..1.0);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    w
}

/// Nonnegative symmetric graph weights: each pair is an edge with probability
/// `p`, weight uniform on [0.1, 1.1). No self-loops unless `n == 1`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> WeightedGraph {
    if n == 1 {
        return WeightedGraph::symmetric(DMatrix::from_element(1, 1, rng.random_range(0.1..1.1))).unwrap();
    }
    loop {
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    let v = rng.random_range(0.1..1.1);
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
        }
        if w.sum() > 0.0 {
            return WeightedGraph::symmetric(w).unwrap();
        }
    }
}

/// Integer weights in 0..=max, symmetric, self-loops allowed.
pub fn integer_graph<R: Rng>(rng: &mut R, n: usize, max: u32) -> WeightedGraph {
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(0..=max) as f64;
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    WeightedGraph::symmetric(w).unwrap()
}

pub fn uniform<R: Rng>(rng: &mut R, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

pub fn gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Orthonormal `n×d` frame from the QR factorization of a Gaussian matrix.
pub fn random_frame<R: Rng>(rng: &mut R, n: usize, d: usize) -> DMatrix<f64> {
    let q = gaussian(rng, n, d).qr().q();
    q.columns(0, d).into_owned()
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, d: usize) -> ClusteringMatrix {
    ClusteringMatrix::from_labels((0..n).map(|_| rng.random_range(0..d)).collect(), d).unwrap()
}

/// Every `{0..d}^n` label vector, lexicographic.
pub fn all_labelings(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut a = vec![0usize; n];
    loop {
        out.push(a.clone());
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            a[pos] += 1;
            if a[pos] < d {
                break;
            }
            a[pos] = 0;
        }
    }
}

/// `Σ_ij X_ij Y_ij`, row-major.
pub fn trace_dot(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            acc += x[(i, j)] * y[(i, j)];
        }
    }
    acc
}

/// Cut weight counted over ordered pairs, straight from the weight matrix.
pub fn naive_cut(w: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            if labels[i] != labels[j] {
                total += w[(i, j)];
            }
        }
    }
    total
}

/// Modularity from its definition: `(1/Vol) Σ_ij [W_ij - k_i k_j / Vol] δ(c_i, c_j)`.
pub fn naive_modularity(w: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let n = w.nrows();
    let k: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    let vol: f64 = k.iter().sum();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                total += w[(i, j)] - k[i] * k[j] / vol;
            }
        }
    }
    total / vol
}
