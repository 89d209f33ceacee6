//! Modularity, Louvain-method search as a Classification network on the
//! zero-diagonal modularity matrix, and Newman's leading-eigenvector bisection.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::clustering::{Clustering, ClusteringMatrix};
use crate::error::{DhnError, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{seeded_rng, uniform_matrix};
use crate::network::{argmax, Activation, ConvergenceCriterion, DhnNetwork, Outcome, RunReport, Schedule};

/// `Q_ij = (W_ij - k_i k_j / Vol) / Vol` and its zero-diagonal twin `Q̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularityMatrix {
    pub q: DMatrix<f64>,
    pub q_zero_diag: DMatrix<f64>,
    /// `Vol²·Q̃ = Vol·W - k kᵀ` off the diagonal. Exact for integer weights,
    /// so ties in the Louvain network are real ties rather than rounding noise.
    pub scaled_zero_diag: DMatrix<f64>,
    pub volume: f64,
    pub degrees: DVector<f64>,
}

pub fn modularity_matrix(g: &WeightedGraph) -> Result<ModularityMatrix> {
    let volume = g.volume();
    if !(volume > 0.0) || !volume.is_finite() {
        return Err(DhnError::DegenerateGraph(format!(
            "modularity needs a positive total edge weight, got {volume}"
        )));
    }
    let degrees = g.degrees();
    let n = g.n();
    let w = g.weights();
    let q = DMatrix::from_fn(n, n, |i, j| (w.get(i, j) - degrees[i] * degrees[j] / volume) / volume);
    let mut q_zero_diag = q.clone();
    q_zero_diag.fill_diagonal(0.0);
    let scaled_zero_diag = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            w.get(i, j) * volume - degrees[i] * degrees[j]
        }
    });
    Ok(ModularityMatrix { q, q_zero_diag, scaled_zero_diag, volume, degrees })
}

impl ModularityMatrix {
    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    /// `Σ_k Σ_{i,j∈c_k} Q_ij`, summed pair by pair so that relabelled copies
    /// of one partition score bit-identically.
    pub fn score(&self, c: &Clustering) -> Result<f64> {
        if c.n() != self.n() {
            return Err(DhnError::shape(format!(
                "clustering covers {} nodes, graph has {}",
                c.n(),
                self.n()
            )));
        }
        let a = c.assignment();
        let mut total = 0.0;
        for i in 0..self.n() {
            for j in 0..self.n() {
                if a[i] == a[j] {
                    total += self.q[(i, j)];
                }
            }
        }
        Ok(total)
    }

    /// `Σ_ij Q_ij`; zero up to rounding for any graph.
    pub fn total(&self) -> f64 {
        self.q.sum()
    }

    /// One Louvain move: place `u` in the cluster whose resulting clustering
    /// has the highest modularity, ties to the lowest cluster index.
    /// All `d` clusters are candidates, not only neighbouring ones.
    pub fn louvain_update(&self, c: &Clustering, u: usize) -> Result<Clustering> {
        if u >= c.n() {
            return Err(DhnError::IndexOutOfRange { index: u, len: c.n() });
        }
        let scores = (0..c.d())
            .map(|m| self.score(&c.with_moved(u, m)))
            .collect::<Result<Vec<_>>>()?;
        let best = argmax(&scores).expect("d >= 1");
        Ok(c.with_moved(u, best))
    }

    /// The network `(Q̃, 0, cl)` with `d`-dimensional states.
    pub fn lms_network(&self, d: usize) -> Result<DhnNetwork> {
        DhnNetwork::new(self.q_zero_diag.clone(), DMatrix::zeros(self.n(), d), Activation::Classification)
    }

    /// `(Vol²·Q̃, 0, cl)`: same trajectories as [`Self::lms_network`] since the
    /// classification activation ignores positive scaling, with energies
    /// multiplied by `Vol²`.
    pub fn scaled_lms_network(&self, d: usize) -> Result<DhnNetwork> {
        DhnNetwork::new(self.scaled_zero_diag.clone(), DMatrix::zeros(self.n(), d), Activation::Classification)
    }

    /// Rescales the energy trace of a `scaled_lms_network` run to `(Q̃, 0, cl)` units.
    fn unscale(&self, report: &mut RunReport) {
        let factor = self.volume * self.volume;
        if let Some(trace) = report.energy_trace.as_mut() {
            trace.iter_mut().for_each(|e| *e /= factor);
        }
    }
}

pub fn modularity_score(g: &WeightedGraph, c: &Clustering) -> Result<f64> {
    modularity_matrix(g)?.score(c)
}

/// `(Q̃, 0, cl)` with `n`-dimensional states, ready for singleton initialization.
pub fn build_lms_network(g: &WeightedGraph) -> Result<DhnNetwork> {
    modularity_matrix(g)?.lms_network(g.n())
}

pub fn louvain_update(g: &WeightedGraph, c: &Clustering, u: usize) -> Result<Clustering> {
    modularity_matrix(g)?.louvain_update(c, u)
}

/// Louvain-method search: serial cyclic run of `(Q̃, 0, cl)` from `I_n`.
pub fn run_lms(g: &WeightedGraph, crit: &ConvergenceCriterion) -> Result<(Clustering, RunReport)> {
    run_lms_from(g, &Clustering::singletons(g.n()), crit)
}

/// Louvain-method search from a caller-supplied clustering.
pub fn run_lms_from(
    g: &WeightedGraph,
    init: &Clustering,
    crit: &ConvergenceCriterion,
) -> Result<(Clustering, RunReport)> {
    let mm = modularity_matrix(g)?;
    let net = mm.scaled_lms_network(init.d())?;
    let mut report = net.run_serial(&init.to_matrix().to_dense(), &Schedule::Cyclic, crit)?;
    mm.unscale(&mut report);
    let clustering = ClusteringMatrix::from_matrix(&report.final_state)?.to_clustering();
    Ok((clustering, report))
}

/// Parallel Louvain-method search from a seeded random clustering into `d` labels.
/// A two-cycle resolves to its higher-modularity state.
pub fn run_plms(
    g: &WeightedGraph,
    d: usize,
    seed: u64,
    crit: &ConvergenceCriterion,
) -> Result<(Clustering, RunReport)> {
    if d == 0 {
        return Err(DhnError::invalid("d must be at least 1"));
    }
    let mm = modularity_matrix(g)?;
    let net = mm.scaled_lms_network(d)?;
    let mut rng = seeded_rng(seed);
    let labels: Vec<usize> = (0..g.n()).map(|_| rng.random_range(0..d)).collect();
    let x0 = ClusteringMatrix::from_labels(labels, d)?.to_dense();
    let mut report = net.run_parallel(&x0, crit)?;
    mm.unscale(&mut report);
    report.schedule_seed = seed;
    let mut best = ClusteringMatrix::from_matrix(&report.final_state)?.to_clustering();
    if report.outcome == Outcome::TwoCycle {
        let mut best_score = mm.score(&best)?;
        for state in &report.cycle_states {
            let c = ClusteringMatrix::from_matrix(state)?.to_clustering();
            let s = mm.score(&c)?;
            if s > best_score {
                best = c;
                best_score = s;
            }
        }
    }
    Ok((best, report))
}

fn mat_vec(m: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(m.nrows(), |i, _| {
        let mut acc = 0.0;
        for j in 0..m.ncols() {
            acc += m[(i, j)] * v[j];
        }
        acc
    })
}

fn unit(v: DVector<f64>) -> Result<DVector<f64>> {
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(DhnError::DegenerateSpectrum(
            "power iteration reached the zero vector".into(),
        ));
    }
    Ok(v / norm)
}

/// Normalized power iteration `v ← Mv / ‖Mv‖₂`.
#[derive(Clone, Debug)]
pub struct PowerIteration<'a> {
    matrix: &'a DMatrix<f64>,
    current: DVector<f64>,
}

impl<'a> PowerIteration<'a> {
    pub fn new(matrix: &'a DMatrix<f64>, start: DVector<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() != start.len() || start.is_empty() {
            return Err(DhnError::shape("power iteration needs a square matrix and a matching start vector"));
        }
        Ok(PowerIteration { matrix, current: unit(start)? })
    }

    /// Seeded start with i.i.d. entries on (-1, 1).
    pub fn seeded(matrix: &'a DMatrix<f64>, seed: u64) -> Result<Self> {
        let start = uniform_matrix(matrix.nrows(), 1, &mut seeded_rng(seed)).column(0).into_owned();
        Self::new(matrix, start)
    }

    pub fn current(&self) -> &DVector<f64> {
        &self.current
    }

    pub fn step(&mut self) -> Result<&DVector<f64>> {
        self.current = unit(mat_vec(self.matrix, &self.current))?;
        Ok(&self.current)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerReport {
    pub vector: DVector<f64>,
    pub iterations: usize,
    pub outcome: Outcome,
}

/// Power iteration until the direction repeats within `epsilon` one of the
/// last `window` directions.
pub fn power_iteration(m: &DMatrix<f64>, seed: u64, crit: &ConvergenceCriterion) -> Result<PowerReport> {
    crit.validate()?;
    let mut it = PowerIteration::seeded(m, seed)?;
    let mut history: VecDeque<DVector<f64>> = VecDeque::from([it.current().clone()]);
    for step in 1..=crit.max_iters {
        let v = it.step()?.clone();
        if let Some(p) = history.iter().position(|h| (h - &v).norm() < crit.epsilon) {
            let outcome = if p == 0 { Outcome::Stable } else if p == 1 { Outcome::TwoCycle } else { Outcome::CycleLen(p + 1) };
            return Ok(PowerReport { vector: v, iterations: step, outcome });
        }
        history.push_front(v);
        history.truncate(crit.window);
    }
    log::warn!("power iteration did not converge within {} steps", crit.max_iters);
    Ok(PowerReport {
        vector: it.current().clone(),
        iterations: crit.max_iters,
        outcome: Outcome::BudgetExhausted,
    })
}

pub fn power_method(m: &DMatrix<f64>, seed: u64, crit: &ConvergenceCriterion) -> Result<DVector<f64>> {
    Ok(power_iteration(m, seed, crit)?.vector)
}

/// Newman bisection: leading eigenvector of `Q`, then its sign pattern with
/// `sgn(0) = +1`. Nodes with `+1` go to cluster 0, the rest to cluster 1.
///
/// The iteration runs on `Q + σI` with `σ` the largest absolute row sum of `Q`,
/// which makes the spectrum nonnegative so the dominant direction is the one
/// with the largest eigenvalue of `Q` rather than the largest magnitude.
pub fn newman_bisect(g: &WeightedGraph, seed: u64, crit: &ConvergenceCriterion) -> Result<Clustering> {
    let mm = modularity_matrix(g)?;
    let shift = (0..mm.n())
        .map(|i| mm.q.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut shifted = mm.q.clone();
    for i in 0..mm.n() {
        shifted[(i, i)] += shift;
    }
    let v = power_method(&shifted, seed, crit)?;
    Ok(sign_split(&v))
}

pub(crate) fn sign_split(v: &DVector<f64>) -> Clustering {
    Clustering::new(v.iter().map(|&x| if x >= 0.0 { 0 } else { 1 }).collect(), 2)
        .expect("labels are 0 or 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    fn pair() -> WeightedGraph {
        WeightedGraph::symmetric(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    #[test]
    fn modularity_matrix_of_single_edge() {
        let mm = modularity_matrix(&pair()).unwrap();
        assert_eq!(mm.q, DMatrix::from_row_slice(2, 2, &[-0.25, 0.25, 0.25, -0.25]));
        assert_eq!(mm.q_zero_diag, DMatrix::from_row_slice(2, 2, &[0.0, 0.25, 0.25, 0.0]));
        assert_eq!(mm.volume, 2.0);
    }

    #[test]
    fn zero_volume_is_degenerate() {
        let g = WeightedGraph::new(DMatrix::zeros(3, 3)).unwrap();
        assert!(matches!(modularity_matrix(&g), Err(DhnError::DegenerateGraph(_))));
        let neg = WeightedGraph::new(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0])).unwrap();
        assert!(matches!(run_lms(&neg, &Default::default()), Err(DhnError::DegenerateGraph(_))));
    }

    #[test]
    fn modularity_score_examples() {
        let together = Clustering::new(vec![0, 0], 1).unwrap();
        let split = Clustering::new(vec![0, 1], 2).unwrap();
        assert_eq!(modularity_score(&pair(), &together).unwrap(), 0.0);
        assert_eq!(modularity_score(&pair(), &split).unwrap(), -0.5);
        let comp = Clustering::new(vec![0, 0, 1, 1], 2).unwrap();
        assert_eq!(modularity_score(&datasets::two_edges(), &comp).unwrap(), 0.5);
    }

    #[test]
    fn lms_network_shape() {
        let net = build_lms_network(&datasets::karate()).unwrap();
        assert_eq!((net.n(), net.d()), (34, 34));
        assert!((0..34).all(|i| net.weights().get(i, i) == 0.0));
        net.validate_convergent().unwrap();
    }

    #[test]
    fn louvain_update_examples() {
        let g = datasets::two_edges();
        let c = louvain_update(&g, &Clustering::singletons(4), 0).unwrap();
        assert_eq!(c.assignment(), &[1, 1, 2, 3]);
        let best = Clustering::new(vec![0, 0, 1, 1], 2).unwrap();
        for u in 0..4 {
            assert_eq!(louvain_update(&g, &best, u).unwrap(), best);
        }
        assert!(louvain_update(&g, &best, 4).is_err());
    }

    #[test]
    fn lms_golden_results() {
        let crit = ConvergenceCriterion::for_activation(Activation::Classification);
        let (c, report) = run_lms(&datasets::two_edges(), &crit).unwrap();
        assert_eq!(report.outcome, Outcome::Stable);
        assert_eq!(modularity_score(&datasets::two_edges(), &c).unwrap(), 0.5);

        let (c, _) = run_lms(&pair(), &crit).unwrap();
        assert_eq!(c.nonempty_clusters(), 1);
        assert_eq!(modularity_score(&pair(), &c).unwrap(), 0.0);
    }

    #[test]
    fn karate_lms_matches_exact_replay() {
        // reference from a rational-arithmetic replay of the same cyclic sweeps
        let g = datasets::karate();
        let (c, report) = run_lms(&g, &ConvergenceCriterion::default()).unwrap();
        assert_eq!(report.outcome, Outcome::Stable);
        assert_eq!(c.nonempty_clusters(), 9);
        let q = modularity_score(&g, &c).unwrap();
        assert!((q - 0.310_979_618_671_926_36).abs() < 1e-12, "{q}");
        // energy of (Q̃, 0, cl) is -(modularity - Tr Q)
        let mm = modularity_matrix(&g).unwrap();
        let last = *report.energy_trace.unwrap().last().unwrap();
        assert!((last + q - mm.q.trace()).abs() < 1e-12);
    }

    #[test]
    fn plms_is_deterministic_per_seed() {
        let g = datasets::karate();
        let crit = ConvergenceCriterion::for_activation(Activation::Classification);
        let (a, ra) = run_plms(&g, 4, 11, &crit).unwrap();
        let (b, rb) = run_plms(&g, 4, 11, &crit).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert!(matches!(ra.outcome, Outcome::Stable | Outcome::TwoCycle));
    }

    #[test]
    fn power_method_examples() {
        let crit = ConvergenceCriterion::default();
        let v = power_method(&DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0])), 3, &crit).unwrap();
        assert!((v[0].abs() - 1.0).abs() < 1e-8 && v[1].abs() < 1e-7);

        let v = power_method(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]), 3, &crit).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0].abs() - s).abs() < 1e-8 && (v[1].abs() - s).abs() < 1e-8);
        assert_eq!(v[0].signum(), v[1].signum());

        let id = DMatrix::identity(3, 3);
        let report = power_iteration(&id, 5, &crit).unwrap();
        assert_eq!(report.iterations, 1);
        let start = PowerIteration::seeded(&id, 5).unwrap().current().clone();
        assert!((report.vector - start).norm() < 1e-15);
    }

    #[test]
    fn power_method_rejects_zero_matrix() {
        let z = DMatrix::zeros(3, 3);
        assert!(matches!(
            power_method(&z, 1, &Default::default()),
            Err(DhnError::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn newman_splits_two_edges_into_components() {
        let g = datasets::two_edges();
        for seed in 0..16 {
            let c = newman_bisect(&g, seed, &Default::default()).unwrap();
            assert_eq!(c.d(), 2);
            assert_eq!(modularity_score(&g, &c).unwrap(), 0.5);
        }
    }

    #[test]
    fn sign_split_is_label_symmetric() {
        let v = DVector::from_vec(vec![0.3, -0.2, 0.0, -1.0]);
        let a = sign_split(&v);
        let b = sign_split(&(-v));
        assert_eq!(a.assignment(), &[0, 1, 0, 1]);
        // zero entries break the exact mirror, everything else swaps
        assert_eq!(b.assignment(), &[1, 0, 0, 0]);
        let w = DVector::from_vec(vec![0.3, -0.2, -1.0]);
        assert!(sign_split(&w).same_partition(&sign_split(&(-w.clone()))));
    }

    #[test]
    fn complete_graph_bisects_into_one_cluster() {
        let k4 = WeightedGraph::symmetric(DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 })).unwrap();
        let c = newman_bisect(&k4, 2, &Default::default()).unwrap();
        assert_eq!(c.nonempty_clusters(), 1);
    }
}
