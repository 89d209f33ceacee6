//! Clusterings, clustering matrices and d-cut values, including the extended
//! graph `G(W, B, U)` that turns a biased network into a plain min-cut problem.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{DhnError, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{frobenius_dot, Weights};
use crate::network::{argmax, Activation, DhnNetwork};

/// Largest search space the exhaustive oracles accept.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Partition of `0..n` into `d` labelled, possibly empty, clusters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clustering {
    assignment: Vec<usize>,
    d: usize,
}

impl Clustering {
    pub fn new(assignment: Vec<usize>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(DhnError::invalid("a clustering needs at least one cluster"));
        }
        if let Some(&bad) = assignment.iter().find(|&&c| c >= d) {
            return Err(DhnError::invalid(format!(
                "cluster index {bad} out of range for d = {d}"
            )));
        }
        Ok(Clustering { assignment, d })
    }

    /// Uses `max + 1` as the cluster count.
    pub fn from_assignment(assignment: Vec<usize>) -> Self {
        let d = assignment.iter().max().map_or(1, |m| m + 1);
        Clustering { assignment, d }
    }

    pub fn singletons(n: usize) -> Self {
        Clustering { assignment: (0..n).collect(), d: n.max(1) }
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.assignment[i] == cluster).collect()
    }

    pub fn nonempty_clusters(&self) -> usize {
        let mut seen = vec![false; self.d];
        self.assignment.iter().for_each(|&c| seen[c] = true);
        seen.into_iter().filter(|&s| s).count()
    }

    /// Relabels clusters by first occurrence: node 0's cluster becomes 0 and so on.
    pub fn canonical(&self) -> Clustering {
        let mut map: HashMap<usize, usize> = HashMap::new();
        let assignment = self
            .assignment
            .iter()
            .map(|&c| {
                let next = map.len();
                *map.entry(c).or_insert(next)
            })
            .collect();
        Clustering { assignment, d: self.d }
    }

    /// Equality of the underlying partitions, ignoring labels and empty clusters.
    pub fn same_partition(&self, other: &Clustering) -> bool {
        self.n() == other.n() && self.canonical().assignment == other.canonical().assignment
    }

    pub fn with_moved(&self, node: usize, cluster: usize) -> Clustering {
        let mut c = self.clone();
        c.assignment[node] = cluster;
        c
    }

    pub fn to_matrix(&self) -> ClusteringMatrix {
        ClusteringMatrix { labels: self.assignment.clone(), d: self.d }
    }
}

/// `n×d` matrix whose rows are one-hot, held as its column labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusteringMatrix {
    labels: Vec<usize>,
    d: usize,
}

impl ClusteringMatrix {
    /// Accepts only matrices with entries exactly 0 or 1 and one 1 per row.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let mut labels = Vec::with_capacity(m.nrows());
        for i in 0..m.nrows() {
            let mut hot = None;
            for c in 0..m.ncols() {
                match m[(i, c)] {
                    v if v == 1.0 && hot.is_none() => hot = Some(c),
                    0.0 => {}
                    _ => {
                        return Err(DhnError::invalid(format!(
                            "row {i} is not a one-hot label vector"
                        )))
                    }
                }
            }
            labels.push(hot.ok_or_else(|| DhnError::invalid(format!("row {i} has no label")))?);
        }
        Ok(ClusteringMatrix { labels, d: m.ncols() })
    }

    pub fn from_labels(labels: Vec<usize>, d: usize) -> Result<Self> {
        Ok(Clustering::new(labels, d)?.to_matrix())
    }

    pub(crate) fn from_labels_unchecked(labels: Vec<usize>, d: usize) -> Self {
        debug_assert!(labels.iter().all(|&l| l < d));
        ClusteringMatrix { labels, d }
    }

    /// `I_n`: every node in its own cluster.
    pub fn identity(n: usize) -> Self {
        ClusteringMatrix { labels: (0..n).collect(), d: n }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n(), self.d);
        for (i, &l) in self.labels.iter().enumerate() {
            m[(i, l)] = 1.0;
        }
        m
    }

    pub fn to_clustering(&self) -> Clustering {
        Clustering { assignment: self.labels.clone(), d: self.d }
    }

    /// `X·Y` for the permutation matrix `Y` sending column `c` to `perm[c]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.d];
        if perm.len() != self.d || perm.iter().any(|&p| p >= self.d || std::mem::replace(&mut seen[p], true)) {
            return Err(DhnError::invalid("not a permutation of the columns"));
        }
        Ok(ClusteringMatrix { labels: self.labels.iter().map(|&l| perm[l]).collect(), d: self.d })
    }

    /// `[X; I_d]`, a clustering matrix of shape `(n+d)×d`.
    pub fn canonical_extension(&self) -> Self {
        let mut labels = self.labels.clone();
        labels.extend(0..self.d);
        ClusteringMatrix { labels, d: self.d }
    }
}

/// `Σ_{k≠l} Σ_{i∈c_k} Σ_{j∈c_l} W_ij`, summed pair by pair.
pub fn d_cut_value(g: &WeightedGraph, c: &Clustering) -> Result<f64> {
    check_len(g, c.n())?;
    let a = c.assignment();
    let mut total = 0.0;
    for i in 0..g.n() {
        for (j, w) in g.weights().row(i) {
            if a[i] != a[j] {
                total += w;
            }
        }
    }
    Ok(total)
}

/// `Vol(G) - Tr(XᵀWX)` for a clustering matrix `X`.
pub fn d_cut_via_trace(g: &WeightedGraph, x: &DMatrix<f64>) -> Result<f64> {
    ClusteringMatrix::from_matrix(x)?;
    check_len(g, x.nrows())?;
    let wx = g.weights().mul(x);
    Ok(g.volume() - frobenius_dot(x, &wx))
}

fn check_len(g: &WeightedGraph, n: usize) -> Result<()> {
    if n != g.n() {
        return Err(DhnError::shape(format!(
            "clustering covers {n} nodes, graph has {}",
            g.n()
        )));
    }
    Ok(())
}

/// The graph on `n + d` nodes with weight matrix `[[W, B], [Bᵀ, U]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedGraph {
    pub base: DMatrix<f64>,
    pub bias: DMatrix<f64>,
    pub coupling: DMatrix<f64>,
    graph: WeightedGraph,
}

impl ExtendedGraph {
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.base.nrows()
    }

    pub fn d(&self) -> usize {
        self.bias.ncols()
    }

    /// d-cut of the clustering encoded by the canonical extension of `x`.
    pub fn extended_cut(&self, x: &ClusteringMatrix) -> Result<f64> {
        if x.n() != self.n() || x.d() != self.d() {
            return Err(DhnError::shape("state does not match the extended graph"));
        }
        d_cut_value(&self.graph, &x.canonical_extension().to_clustering())
    }

    /// Maps a clustering of all `n + d` nodes whose anchor nodes sit in
    /// distinct clusters to the state `X·Y⁻¹` whose canonical extension
    /// encodes the same partition. `None` when two anchors share a cluster.
    pub fn state_of(&self, c: &Clustering) -> Option<ClusteringMatrix> {
        let (n, d) = (self.n(), self.d());
        if c.n() != n + d {
            return None;
        }
        let mut column_of = HashMap::new();
        for p in 0..d {
            if column_of.insert(c.cluster_of(n + p), p).is_some() {
                return None;
            }
        }
        let labels = (0..n).map(|i| column_of.get(&c.cluster_of(i)).copied()).collect::<Option<Vec<_>>>()?;
        Some(ClusteringMatrix { labels, d })
    }
}

pub fn build_extended_graph(w: &DMatrix<f64>, b: &DMatrix<f64>, u: &DMatrix<f64>) -> Result<ExtendedGraph> {
    let (n, d) = (w.nrows(), b.ncols());
    if w.ncols() != n || b.nrows() != n || u.nrows() != d || u.ncols() != d {
        return Err(DhnError::shape("expected W: n×n, B: n×d, U: d×d"));
    }
    for (name, m) in [("W", w), ("U", u)] {
        if let Some((i, j)) = Weights::Dense(m.clone()).asymmetry() {
            return Err(DhnError::invalid(format!("{name} is not symmetric at ({i}, {j})")));
        }
    }
    let mut full = DMatrix::zeros(n + d, n + d);
    full.view_mut((0, 0), (n, n)).copy_from(w);
    full.view_mut((0, n), (n, d)).copy_from(b);
    full.view_mut((n, 0), (d, n)).copy_from(&b.transpose());
    full.view_mut((n, n), (d, d)).copy_from(u);
    Ok(ExtendedGraph {
        base: w.clone(),
        bias: b.clone(),
        coupling: u.clone(),
        graph: WeightedGraph::new(full)?,
    })
}

/// Anchor coupling strong enough that a global minimum cut of `G(W, B, U)`
/// separates all anchor nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaPolicy {
    pub kappa: f64,
    pub bound_m: f64,
    pub bound_big_m: f64,
}

impl KappaPolicy {
    /// `U` with `-κ` off the diagonal and zeros on it.
    pub fn coupling(&self, d: usize) -> DMatrix<f64> {
        DMatrix::from_fn(d, d, |i, j| if i == j { 0.0 } else { -self.kappa })
    }
}

/// `M = Σ|W_ij| + 2Σ|B_ij|`, `m = -M`, `κ = 2M + 1`.
pub fn kappa_policy(w: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<KappaPolicy> {
    if w.nrows() != w.ncols() || b.nrows() != w.nrows() {
        return Err(DhnError::shape("expected W: n×n and B: n×d"));
    }
    let big_m = w.iter().map(|v| v.abs()).sum::<f64>() + 2.0 * b.iter().map(|v| v.abs()).sum::<f64>();
    Ok(KappaPolicy { kappa: 2.0 * big_m + 1.0, bound_m: -big_m, bound_big_m: big_m })
}

fn search_space(n: usize, d: usize) -> Result<u64> {
    let mut size: u64 = 1;
    for _ in 0..n {
        size = size.saturating_mul(d as u64);
        if size > ENUMERATION_LIMIT {
            return Err(DhnError::TooLarge(format!(
                "{d}^{n} assignments exceed the limit of {ENUMERATION_LIMIT}"
            )));
        }
    }
    Ok(size)
}

/// Visits every assignment in `{0..d}^n` in lexicographic order.
pub(crate) fn for_each_assignment(n: usize, d: usize, mut f: impl FnMut(&[usize])) {
    let mut a = vec![0usize; n];
    loop {
        f(&a);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
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

/// Exhaustive minimum d-cut; ties go to the lexicographically smallest assignment.
pub fn brute_force_min_dcut(g: &WeightedGraph, d: usize) -> Result<(Clustering, f64)> {
    if d == 0 {
        return Err(DhnError::invalid("d must be at least 1"));
    }
    search_space(g.n(), d)?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_assignment(g.n(), d, |a| {
        let c = Clustering { assignment: a.to_vec(), d };
        let v = d_cut_value(g, &c).expect("length matches");
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((a.to_vec(), v));
        }
    });
    let (assignment, value) = best.expect("at least one assignment");
    Ok((Clustering { assignment, d }, value))
}

/// Every clustering matrix that no single serial update changes.
pub fn stable_states_census(net: &DhnNetwork) -> Result<Vec<ClusteringMatrix>> {
    if net.activation() != Activation::Classification {
        return Err(DhnError::invalid("the census needs the classification activation"));
    }
    let (n, d) = (net.n(), net.d());
    search_space(n, d)?;
    let mut stable = Vec::new();
    for_each_assignment(n, d, |labels| {
        let fixed = (0..n).all(|k| {
            let mut h = net.weights().mul_row_labels(k, labels, d);
            for (c, v) in h.iter_mut().enumerate() {
                *v += net.bias()[(k, c)];
            }
            argmax(&h) == Some(labels[k])
        });
        if fixed {
            stable.push(ClusteringMatrix { labels: labels.to_vec(), d });
        }
    });
    Ok(stable)
}
