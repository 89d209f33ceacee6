//! Weight storage and the fixed-order matrix products the dynamics run on.
//!
//! Every product sums over `j` in ascending order and skips stored zeros, so
//! the dense and sparse layouts give bit-identical results.

use nalgebra::{DMatrix, RowDVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DhnError, Result};

/// Largest node count kept in the dense layout by the automatic constructors.
pub const DENSE_LIMIT: usize = 4096;

/// Symmetry tolerance used by the convergence-guarantee checks.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Compressed sparse rows with column indices sorted inside each row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseWeights {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseWeights {
    fn from_sorted_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, w) in triplets {
            if last == Some((i, j)) {
                *vals.last_mut().expect("previous entry") += w;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(w);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut sparse = SparseWeights { n, row_ptr, cols, vals };
        sparse.drop_zeros();
        sparse
    }

    fn drop_zeros(&mut self) {
        if self.vals.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.vals[k] != 0.0 {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

/// Square weight matrix, dense or sparse.
#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Dense(DMatrix<f64>),
    Sparse(SparseWeights),
}

impl Weights {
    /// Picks the dense layout up to [`DENSE_LIMIT`] nodes and sparse above.
    pub fn from_dense(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(DhnError::shape(format!(
                "weight matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() > DENSE_LIMIT {
            Ok(Weights::Sparse(Self::sparse_of(&m)))
        } else {
            Ok(Weights::Dense(m))
        }
    }

    /// Forces the sparse layout regardless of size.
    pub fn sparse_from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(DhnError::shape("weight matrix must be square"));
        }
        Ok(Weights::Sparse(Self::sparse_of(m)))
    }

    fn sparse_of(m: &DMatrix<f64>) -> SparseWeights {
        let n = m.nrows();
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = m[(i, j)];
                if w != 0.0 {
                    triplets.push((i, j, w));
                }
            }
        }
        SparseWeights::from_sorted_triplets(n, triplets)
    }

    /// Builds from `(row, col, weight)` records; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|t| t.0 >= n || t.1 >= n) {
            return Err(DhnError::invalid(format!(
                "entry ({i}, {j}) outside a {n}x{n} matrix"
            )));
        }
        if n > DENSE_LIMIT {
            return Ok(Weights::Sparse(SparseWeights::from_sorted_triplets(n, triplets)));
        }
        let mut m = DMatrix::zeros(n, n);
        for (i, j, w) in triplets {
            m[(i, j)] += w;
        }
        Ok(Weights::Dense(m))
    }

    pub fn n(&self) -> usize {
        match self {
            Weights::Dense(m) => m.nrows(),
            Weights::Sparse(s) => s.n,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Weights::Sparse(_))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Weights::Dense(m) => m[(i, j)],
            Weights::Sparse(s) => {
                let cols = &s.cols[s.row_ptr[i]..s.row_ptr[i + 1]];
                match cols.binary_search(&j) {
                    Ok(k) => s.vals[s.row_ptr[i] + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Nonzero entries of row `i` in ascending column order.
    pub fn row(&self, i: usize) -> RowIter<'_> {
        match self {
            Weights::Dense(m) => RowIter::Dense { m, i, j: 0 },
            Weights::Sparse(s) => RowIter::Sparse {
                cols: &s.cols[s.row_ptr[i]..s.row_ptr[i + 1]],
                vals: &s.vals[s.row_ptr[i]..s.row_ptr[i + 1]],
                k: 0,
            },
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Weights::Dense(m) => m.clone(),
            Weights::Sparse(s) => {
                let mut m = DMatrix::zeros(s.n, s.n);
                for i in 0..s.n {
                    for (j, w) in self.row(i) {
                        m[(i, j)] = w;
                    }
                }
                m
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Weights {
        match self {
            Weights::Dense(m) => Weights::Dense(m * factor),
            Weights::Sparse(s) => {
                let mut s = s.clone();
                s.vals.iter_mut().for_each(|v| *v *= factor);
                s.drop_zeros();
                Weights::Sparse(s)
            }
        }
    }

    /// First pair `(i, j)` violating symmetry beyond [`SYMMETRY_TOL`], if any.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        let n = self.n();
        for i in 0..n {
            for (j, w) in self.row(i) {
                let wt = self.get(j, i);
                let scale = 1f64.max(w.abs()).max(wt.abs());
                if (w - wt).abs() > SYMMETRY_TOL * scale {
                    return Some((i, j));
                }
            }
        }
        // entries present only in the transposed position are caught when
        // their own row is visited
        None
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetry().is_none()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, w)| w).sum()
    }

    /// Sum of every entry, `Σ_ij W_ij`.
    pub fn total(&self) -> f64 {
        (0..self.n()).map(|i| self.row_sum(i)).sum()
    }

    /// `W·X` with ascending-`j` accumulation.
    pub fn mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n();
        let d = x.ncols();
        let mut out = DMatrix::zeros(n, d);
        let mut acc = vec![0.0f64; d];
        for i in 0..n {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for (j, w) in self.row(i) {
                for (c, a) in acc.iter_mut().enumerate() {
                    *a += w * x[(j, c)];
                }
            }
            for (c, a) in acc.iter().enumerate() {
                out[(i, c)] = *a;
            }
        }
        out
    }

    /// Row `i` of `W·X`.
    pub fn mul_row(&self, i: usize, x: &DMatrix<f64>) -> RowDVector<f64> {
        let mut acc = RowDVector::zeros(x.ncols());
        for (j, w) in self.row(i) {
            for c in 0..x.ncols() {
                acc[c] += w * x[(j, c)];
            }
        }
        acc
    }

    /// Row `i` of `W·X` for a one-hot `X` given by its labels.
    ///
    /// Bitwise equal to [`Weights::mul_row`] on the encoded matrix.
    pub fn mul_row_labels(&self, i: usize, labels: &[usize], d: usize) -> Vec<f64> {
        let mut acc = vec![0.0f64; d];
        for (j, w) in self.row(i) {
            acc[labels[j]] += w;
        }
        acc
    }
}

pub enum RowIter<'a> {
    Dense { m: &'a DMatrix<f64>, i: usize, j: usize },
    Sparse { cols: &'a [usize], vals: &'a [f64], k: usize },
}

impl Iterator for RowIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            RowIter::Dense { m, i, j } => {
                while *j < m.ncols() {
                    let w = m[(*i, *j)];
                    *j += 1;
                    if w != 0.0 {
                        return Some((*j - 1, w));
                    }
                }
                None
            }
            RowIter::Sparse { cols, vals, k } => {
                let item = (*k < cols.len()).then(|| (cols[*k], vals[*k]));
                *k += 1;
                item
            }
        }
    }
}

/// Seeded generator shared by every randomized initialization.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n×d` matrix with i.i.d. entries on the open interval (-1, 1), filled row by row.
pub fn uniform_matrix<R: Rng>(n: usize, d: usize, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, d);
    for i in 0..n {
        for c in 0..d {
            m[(i, c)] = open_unit(rng);
        }
    }
    m
}

fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let v: f64 = rng.random_range(-1.0..1.0);
        if v != -1.0 {
            return v;
        }
    }
}

/// Frobenius inner product `Tr(AᵀB)`.
pub fn frobenius_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
