//! Projection onto the Stiefel manifold of orthonormal `d`-frames and the
//! generalized Newman methods built on it.
//!
//! The projection maximizing `Tr(SᵀM)` over frames `S` is the polar factor
//! `UVᵀ` of the thin SVD `M = UΣVᵀ` (orthogonal Procrustes).

use nalgebra::DMatrix;

use crate::clustering::Clustering;
use crate::error::{DhnError, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{seeded_rng, uniform_matrix};
use crate::modularity::modularity_matrix;
use crate::network::{
    classify_rows, Activation, ConvergenceCriterion, DhnNetwork, Outcome, RunReport, Schedule, StateMatrix,
};

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-12;
const FRAME_TOL: f64 = 1e-10;

/// `n×d` matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct StiefelFrame {
    entries: DMatrix<f64>,
    unique: bool,
}

impl StiefelFrame {
    /// Checks `‖SᵀS - I‖_F ≤ 1e-10`.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.ncols() > entries.nrows() {
            return Err(DhnError::invalid("a d-frame in R^n needs d <= n"));
        }
        let err = frame_error(&entries);
        if err > FRAME_TOL {
            return Err(DhnError::invalid(format!("columns are not orthonormal (error {err:e})")));
        }
        Ok(StiefelFrame { entries, unique: true })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// `false` when the projected matrix was rank deficient and the maximizer
    /// is not unique.
    pub fn is_unique(&self) -> bool {
        self.unique
    }
}

/// `‖SᵀS - I_d‖_F`.
pub fn frame_error(s: &DMatrix<f64>) -> f64 {
    (s.transpose() * s - DMatrix::<f64>::identity(s.ncols(), s.ncols())).norm()
}

/// Polar factor of `m`, the maximizer of `Tr(SᵀM)` over orthonormal frames.
pub fn stiefel_project(m: &DMatrix<f64>) -> Result<StiefelFrame> {
    let (n, d) = m.shape();
    if d > n {
        return Err(DhnError::invalid(format!("cannot project a {n}x{d} matrix: d > n")));
    }
    if d == 0 {
        return Err(DhnError::invalid("cannot project a matrix with no columns"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(DhnError::invalid("matrix has non-finite entries"));
    }
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let deficient = svd.singular_values.iter().any(|&s| s <= RANK_TOL * sigma_max) || sigma_max == 0.0;
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let mut frame = u * v_t;
    if frame_error(&frame) > FRAME_TOL {
        // zero singular values can leave U without a full orthonormal set
        frame = complete_frame(&frame);
    }
    if deficient {
        log::warn!("Stiefel projection of a rank-deficient {n}x{d} matrix is not unique");
    }
    Ok(StiefelFrame { entries: frame, unique: !deficient })
}

/// Orthonormalizes `m` column by column, replacing degenerate columns with
/// standard basis directions.
fn complete_frame(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, d) = m.shape();
    let mut out: DMatrix<f64> = DMatrix::zeros(n, d);
    let mut basis = 0usize;
    for c in 0..d {
        let mut candidate = m.column(c).into_owned();
        loop {
            for k in 0..c {
                let proj = out.column(k).dot(&candidate);
                candidate -= out.column(k) * proj;
            }
            let norm = candidate.norm();
            if norm > 1e-8 {
                out.set_column(c, &(candidate / norm));
                break;
            }
            candidate = DMatrix::<f64>::identity(n, n).column(basis).into_owned();
            basis += 1;
        }
    }
    out
}

/// The network `(Q, 0, P)` with the Stiefel projection as activation.
pub fn gnm_network(g: &WeightedGraph, d: usize) -> Result<DhnNetwork> {
    if d == 0 || d > g.n() {
        return Err(DhnError::invalid(format!(
            "generalized Newman needs 1 <= d <= n, got d = {d}, n = {}",
            g.n()
        )));
    }
    let mm = modularity_matrix(g)?;
    DhnNetwork::new(mm.q, DMatrix::zeros(g.n(), d), Activation::StiefelProjection)
}

/// Projection of a seeded `n×d` matrix with i.i.d. entries on (-1, 1).
pub fn gnm_initial_state(n: usize, d: usize, seed: u64) -> Result<StateMatrix> {
    let raw = uniform_matrix(n, d, &mut seeded_rng(seed));
    Ok(stiefel_project(&raw)?.into_matrix())
}

/// State used for the final classification. In a two-cycle the components
/// along negative eigenvalues flip sign every step, so summing the two cycle
/// states keeps only the part spanned by positive eigenvalues.
fn readout(report: &RunReport) -> StateMatrix {
    match (report.outcome, report.cycle_states.as_slice()) {
        (Outcome::TwoCycle, [a, b]) => a + b,
        _ => report.final_state.clone(),
    }
}

/// Generalized Newman method: parallel run of `(Q, 0, P)` from a random
/// frame, then row-wise classification.
pub fn run_gnm(
    g: &WeightedGraph,
    d: usize,
    seed: u64,
    crit: &ConvergenceCriterion,
) -> Result<(Clustering, RunReport)> {
    let net = gnm_network(g, d)?;
    let x0 = gnm_initial_state(g.n(), d, seed)?;
    let mut report = net.run_parallel(&x0, crit)?;
    report.schedule_seed = seed;
    let clustering = classify_rows(&readout(&report)).to_clustering();
    Ok((clustering, report))
}

/// Serial generalized Newman method. Each neuron update replaces row `i`
/// with row `i` of `P(Q·X)`; the whole state is re-projected at the end of
/// every sweep and convergence is checked on sweep boundaries.
pub fn run_sgnm(
    g: &WeightedGraph,
    d: usize,
    seed: u64,
    crit: &ConvergenceCriterion,
) -> Result<(Clustering, RunReport)> {
    crit.validate()?;
    let net = gnm_network(g, d)?;
    let mut x = gnm_initial_state(g.n(), d, seed)?;
    let mut history = std::collections::VecDeque::from([x.clone()]);
    let mut outcome = Outcome::BudgetExhausted;
    let mut cycle_states = Vec::new();
    let mut iterations = crit.max_iters;
    let mut changes = 0usize;
    for sweep in 1..=crit.max_iters {
        for i in 0..g.n() {
            let next = net.serial_step(&x, i)?;
            if next.row(i) != x.row(i) {
                changes += 1;
            }
            x = next;
        }
        x = stiefel_project(&x)?.into_matrix();
        if let Some(p) = history.iter().position(|h| crit.distance(h, &x) < crit.epsilon) {
            let k = p + 1;
            outcome = match k {
                1 => Outcome::Stable,
                2 => Outcome::TwoCycle,
                k => Outcome::CycleLen(k),
            };
            cycle_states = history.iter().take(k - 1).rev().cloned().collect();
            cycle_states.push(x.clone());
            iterations = sweep;
            break;
        }
        history.push_front(x.clone());
        history.truncate(crit.window);
    }
    let report = RunReport {
        final_state: x,
        iterations,
        outcome,
        energy_trace: None,
        schedule_seed: seed,
        state_changes: changes,
        cycle_states,
    };
    let clustering = classify_rows(&readout(&report)).to_clustering();
    Ok((clustering, report))
}

/// GNM followed by one cyclic serial sweep of the Louvain network `(Q̃, 0, cl)`
/// started from the GNM clustering.
pub fn run_gnm_plus_lms(
    g: &WeightedGraph,
    d: usize,
    seed: u64,
    crit: &ConvergenceCriterion,
) -> Result<(Clustering, RunReport)> {
    let (gnm, gnm_report) = run_gnm(g, d, seed, crit)?;
    let polished = one_lms_sweep(g, &gnm)?;
    Ok((polished, gnm_report))
}

/// A single cyclic sweep of `(Q̃, 0, cl)` starting from `c`.
pub fn one_lms_sweep(g: &WeightedGraph, c: &Clustering) -> Result<Clustering> {
    let net = modularity_matrix(g)?.scaled_lms_network(c.d())?;
    let crit = ConvergenceCriterion { max_iters: 1, track_energy: false, ..Default::default() };
    let report = net.run_serial(&c.to_matrix().to_dense(), &Schedule::Cyclic, &crit)?;
    Ok(classify_rows(&report.final_state).to_clustering())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::modularity::modularity_score;

    #[test]
    fn frame_is_its_own_projection() {
        let s = gnm_initial_state(5, 3, 9).unwrap();
        let p = stiefel_project(&s).unwrap();
        assert!((p.matrix() - &s).norm() < 1e-12);
        assert!(p.is_unique());
    }

    #[test]
    fn diagonal_projects_to_identity() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 2.0]);
        let p = stiefel_project(&m).unwrap();
        assert!((p.matrix() - DMatrix::<f64>::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn column_projects_to_unit_vector() {
        let m = DMatrix::from_column_slice(3, 1, &[3.0, 0.0, 4.0]);
        let p = stiefel_project(&m).unwrap();
        let expected = DMatrix::from_column_slice(3, 1, &[0.6, 0.0, 0.8]);
        assert!((p.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn wide_matrix_rejected() {
        assert!(matches!(stiefel_project(&DMatrix::zeros(2, 3)), Err(DhnError::InvalidArgument(_))));
        assert!(StiefelFrame::new(DMatrix::from_element(2, 1, 1.0)).is_err());
    }

    #[test]
    fn rank_deficient_input_still_yields_a_frame() {
        for m in [
            DMatrix::zeros(4, 2),
            DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]),
        ] {
            let p = stiefel_project(&m).unwrap();
            assert!(!p.is_unique());
            assert!(frame_error(p.matrix()) <= 1e-10);
        }
    }

    #[test]
    fn gnm_golden_two_edges() {
        let g = datasets::two_edges();
        for seed in 0..16 {
            let (c, report) = run_gnm(&g, 2, seed, &Default::default()).unwrap();
            assert!(report.outcome != Outcome::BudgetExhausted);
            assert!(frame_error(&report.final_state) <= 1e-8);
            assert_eq!(modularity_score(&g, &c).unwrap(), 0.5, "seed {seed}");
        }
    }

    #[test]
    fn gnm_states_stay_on_the_manifold() {
        let g = datasets::karate();
        let net = gnm_network(&g, 4).unwrap();
        let mut x = gnm_initial_state(34, 4, 1).unwrap();
        for _ in 0..25 {
            x = net.parallel_step(&x).unwrap();
            assert!(frame_error(&x) <= 1e-8);
        }
    }

    #[test]
    fn gnm_is_deterministic() {
        let g = datasets::karate();
        let a = run_gnm(&g, 3, 4, &Default::default()).unwrap();
        let b = run_gnm(&g, 3, 4, &Default::default()).unwrap();
        assert_eq!(a, b);
        assert!(gnm_network(&g, 35).is_err());
    }

    #[test]
    fn sgnm_sweeps_end_on_frames() {
        let g = datasets::karate();
        let crit = ConvergenceCriterion { max_iters: 20, ..Default::default() };
        let (c, report) = run_sgnm(&g, 3, 2, &crit).unwrap();
        assert!(frame_error(&report.final_state) <= 1e-8);
        assert_eq!(run_sgnm(&g, 3, 2, &crit).unwrap().0, c);
    }

    #[test]
    fn gnm_plus_lms_golden_two_edges() {
        let g = datasets::two_edges();
        let (c, _) = run_gnm_plus_lms(&g, 2, 0, &Default::default()).unwrap();
        assert_eq!(modularity_score(&g, &c).unwrap(), 0.5);
        // already LMS-stable, so a second sweep changes nothing
        assert_eq!(one_lms_sweep(&g, &c).unwrap(), c);
    }
}
