//! Multidimensional Hopfield networks: the triple `(W, B, F)` acting on an
//! `n×d` matrix of neuron states, iterated one neuron at a time (serial mode)
//! or all at once (parallel mode).
//!
//! Neuron indices are 0-based throughout the API.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use crate::clustering::ClusteringMatrix;
use crate::embedding::normalize_row_in_place;
use crate::error::{DhnError, Result};
use crate::linalg::{frobenius_dot, seeded_rng, Weights};
use crate::stiefel::stiefel_project;

/// Matrix of neuron states `X`, one row per neuron.
pub type StateMatrix = DMatrix<f64>;
/// `H = W·X + B`.
pub type PreActivation = DMatrix<f64>;
/// Difference between a new and an old state matrix.
pub type StateDelta = DMatrix<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    /// One-hot indicator of the row argmax.
    Classification,
    /// Row-wise unit normalization, zero rows stay zero.
    L2Normalize,
    Identity,
    /// Whole-matrix projection onto orthonormal `d`-frames.
    StiefelProjection,
}

impl Activation {
    pub fn is_discrete(self) -> bool {
        self == Activation::Classification
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in v.iter().enumerate() {
        match best {
            Some((_, b)) if x <= b => {}
            _ if x.is_nan() => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i).or_else(|| (!v.is_empty()).then_some(0))
}

/// The classification function: one-hot vector at the argmax of `v`.
pub fn classify(v: &[f64]) -> Result<Vec<f64>> {
    let k = argmax(v).ok_or_else(|| DhnError::invalid("cannot classify an empty vector"))?;
    let mut out = vec![0.0; v.len()];
    out[k] = 1.0;
    Ok(out)
}

/// Applies [`classify`] to every row.
pub fn classify_rows(m: &DMatrix<f64>) -> ClusteringMatrix {
    let d = m.ncols();
    let labels = (0..m.nrows())
        .map(|i| {
            let row: Vec<f64> = m.row(i).iter().copied().collect();
            argmax(&row).unwrap_or(0)
        })
        .collect();
    ClusteringMatrix::from_labels_unchecked(labels, d.max(1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceCriterion {
    /// Distance threshold for continuous states.
    pub epsilon: f64,
    /// Number of previous states compared against (the cycle length bound).
    pub window: usize,
    /// Sweep budget in serial mode, step budget in parallel mode.
    pub max_iters: usize,
    /// Compare directions `X/‖X‖_F` instead of raw states.
    pub normalize: bool,
    /// Record the energy after every serial step of a Classification run.
    pub track_energy: bool,
}

impl Default for ConvergenceCriterion {
    fn default() -> Self {
        ConvergenceCriterion {
            epsilon: 1e-8,
            window: 2,
            max_iters: 1000,
            normalize: true,
            track_energy: true,
        }
    }
}

impl ConvergenceCriterion {
    pub fn for_activation(activation: Activation) -> Self {
        ConvergenceCriterion {
            normalize: !activation.is_discrete(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(DhnError::invalid("convergence window must be at least 1"));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(DhnError::invalid("epsilon must be a finite nonnegative number"));
        }
        if self.max_iters == 0 {
            return Err(DhnError::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }

    /// Distance between two states under this criterion.
    pub fn distance(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        if self.normalize {
            (direction(a) - direction(b)).norm()
        } else {
            (a - b).norm()
        }
    }
}

fn direction(m: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = m.norm();
    if norm > 0.0 {
        m / norm
    } else {
        m.clone()
    }
}

/// Order in which serial mode visits the neurons within a sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// `0, 1, …, n-1` every sweep.
    Cyclic,
    /// A fresh seeded random permutation every sweep.
    RandomPermutation { seed: u64 },
    /// The same caller-supplied permutation every sweep.
    Fixed(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Stable,
    TwoCycle,
    CycleLen(usize),
    BudgetExhausted,
}

impl Outcome {
    pub fn period(self) -> Option<usize> {
        match self {
            Outcome::Stable => Some(1),
            Outcome::TwoCycle => Some(2),
            Outcome::CycleLen(k) => Some(k),
            Outcome::BudgetExhausted => None,
        }
    }

    fn from_period(k: usize) -> Self {
        match k {
            1 => Outcome::Stable,
            2 => Outcome::TwoCycle,
            k => Outcome::CycleLen(k),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Stable => write!(f, "stable"),
            Outcome::TwoCycle => write!(f, "two-cycle"),
            Outcome::CycleLen(k) => write!(f, "cycle-{k}"),
            Outcome::BudgetExhausted => write!(f, "budget-exhausted"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub final_state: StateMatrix,
    /// Sweeps in serial mode, steps in parallel mode.
    pub iterations: usize,
    pub outcome: Outcome,
    /// Energy of the initial state followed by the energy after every serial step.
    pub energy_trace: Option<Vec<f64>>,
    pub schedule_seed: u64,
    /// Number of single-neuron updates that changed a row.
    pub state_changes: usize,
    /// States of the detected cycle in chronological order, ending with `final_state`.
    pub cycle_states: Vec<StateMatrix>,
}

/// A `d`-dimensional Hopfield network with `n` neurons.
#[derive(Clone, Debug, PartialEq)]
pub struct DhnNetwork {
    weights: Weights,
    bias: DMatrix<f64>,
    activation: Activation,
}

impl DhnNetwork {
    pub fn new(weights: DMatrix<f64>, bias: DMatrix<f64>, activation: Activation) -> Result<Self> {
        Self::from_weights(Weights::from_dense(weights)?, bias, activation)
    }

    pub fn from_weights(weights: Weights, bias: DMatrix<f64>, activation: Activation) -> Result<Self> {
        if bias.nrows() != weights.n() {
            return Err(DhnError::shape(format!(
                "bias has {} rows but the network has {} neurons",
                bias.nrows(),
                weights.n()
            )));
        }
        if bias.ncols() == 0 || weights.n() == 0 {
            return Err(DhnError::shape("network needs n >= 1 and d >= 1"));
        }
        Ok(DhnNetwork { weights, bias, activation })
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn d(&self) -> usize {
        self.bias.ncols()
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn bias(&self) -> &DMatrix<f64> {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Checks the hypotheses under which serial Classification runs decrease
    /// energy: symmetric `W` and a nonnegative diagonal.
    pub fn validate_convergent(&self) -> Result<()> {
        if let Some((i, j)) = self.weights.asymmetry() {
            return Err(DhnError::invalid(format!(
                "weights are not symmetric at ({i}, {j})"
            )));
        }
        if let Some(i) = (0..self.n()).find(|&i| self.weights.get(i, i) < 0.0) {
            return Err(DhnError::invalid(format!(
                "weights have a negative diagonal entry at {i}"
            )));
        }
        Ok(())
    }

    fn check_state(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.nrows() != self.n() || x.ncols() != self.d() {
            return Err(DhnError::shape(format!(
                "state is {}x{}, network expects {}x{}",
                x.nrows(),
                x.ncols(),
                self.n(),
                self.d()
            )));
        }
        Ok(())
    }

    pub fn pre_activation(&self, x: &StateMatrix) -> Result<PreActivation> {
        self.check_state(x)?;
        Ok(self.weights.mul(x) + &self.bias)
    }

    fn pre_activation_row(&self, x: &StateMatrix, i: usize) -> Vec<f64> {
        let row = self.weights.mul_row(i, x);
        row.iter()
            .zip(self.bias.row(i).iter())
            .map(|(h, b)| h + b)
            .collect()
    }

    fn pre_activation_row_labels(&self, labels: &[usize], i: usize) -> Vec<f64> {
        let mut h = self.weights.mul_row_labels(i, labels, self.d());
        for (c, v) in h.iter_mut().enumerate() {
            *v += self.bias[(i, c)];
        }
        h
    }

    fn activate_row(&self, mut h: Vec<f64>) -> Vec<f64> {
        match self.activation {
            Activation::Classification => {
                let k = argmax(&h).unwrap_or(0);
                h.iter_mut().for_each(|v| *v = 0.0);
                h[k] = 1.0;
                h
            }
            Activation::L2Normalize => {
                normalize_row_in_place(&mut h);
                h
            }
            Activation::Identity => h,
            Activation::StiefelProjection => unreachable!("matrix activation has no row form"),
        }
    }

    fn activate(&self, h: PreActivation) -> Result<StateMatrix> {
        match self.activation {
            Activation::StiefelProjection => Ok(stiefel_project(&h)?.into_matrix()),
            Activation::Identity => Ok(h),
            _ => {
                let mut out = h.clone();
                for i in 0..h.nrows() {
                    let row = self.activate_row(h.row(i).iter().copied().collect());
                    for (c, v) in row.into_iter().enumerate() {
                        out[(i, c)] = v;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Updates neuron `i` only. With the Stiefel activation the new row is
    /// row `i` of the projection of the full pre-activation.
    pub fn serial_step(&self, x: &StateMatrix, i: usize) -> Result<StateMatrix> {
        self.check_state(x)?;
        if i >= self.n() {
            return Err(DhnError::IndexOutOfRange { index: i, len: self.n() });
        }
        let mut out = x.clone();
        if self.activation == Activation::StiefelProjection {
            let projected = self.activate(self.pre_activation(x)?)?;
            out.set_row(i, &projected.row(i));
        } else {
            let row = self.activate_row(self.pre_activation_row(x, i));
            for (c, v) in row.into_iter().enumerate() {
                out[(i, c)] = v;
            }
        }
        Ok(out)
    }

    /// `X(t+1) = F(W·X(t) + B)`.
    pub fn parallel_step(&self, x: &StateMatrix) -> Result<StateMatrix> {
        let h = self.pre_activation(x)?;
        self.activate(h)
    }

    /// `V(X) = -Tr(XᵀWX + 2XᵀB)`.
    pub fn energy(&self, x: &StateMatrix) -> Result<f64> {
        self.check_state(x)?;
        let wx = self.weights.mul(x);
        Ok(-frobenius_dot(x, &wx) - 2.0 * frobenius_dot(x, &self.bias))
    }

    /// `V(X+Δ) - V(X)` as `-2·Tr(ΔᵀH) - Tr(ΔᵀWΔ)` with `H = W·X + B`.
    /// Exact for symmetric `W`.
    pub fn energy_delta(&self, x: &StateMatrix, delta: &StateDelta) -> Result<f64> {
        self.check_state(x)?;
        self.check_state(delta)?;
        let h = self.pre_activation(x)?;
        let wd = self.weights.mul(delta);
        Ok(-2.0 * frobenius_dot(delta, &h) - frobenius_dot(delta, &wd))
    }

    fn sweep_order(&self, schedule: &Schedule) -> Result<Vec<usize>> {
        let n = self.n();
        match schedule {
            Schedule::Cyclic | Schedule::RandomPermutation { .. } => Ok((0..n).collect()),
            Schedule::Fixed(order) => {
                let mut seen = vec![false; n];
                for &i in order {
                    if i >= n || std::mem::replace(&mut seen[i], true) {
                        return Err(DhnError::invalid(
                            "a fixed schedule must be a permutation of the neurons",
                        ));
                    }
                }
                if order.len() != n {
                    return Err(DhnError::invalid(
                        "a fixed schedule must be a permutation of the neurons",
                    ));
                }
                Ok(order.clone())
            }
        }
    }

    /// Serial mode until a full sweep changes no row or the sweep budget runs out.
    pub fn run_serial(
        &self,
        x0: &StateMatrix,
        schedule: &Schedule,
        crit: &ConvergenceCriterion,
    ) -> Result<RunReport> {
        self.check_state(x0)?;
        crit.validate()?;
        let mut order = self.sweep_order(schedule)?;
        let seed = match schedule {
            Schedule::RandomPermutation { seed } => *seed,
            _ => 0,
        };
        let mut rng = seeded_rng(seed);
        let shuffle = matches!(schedule, Schedule::RandomPermutation { .. });

        if self.activation == Activation::Classification {
            if let Ok(start) = ClusteringMatrix::from_matrix(x0) {
                return self.run_serial_labels(start, &mut order, shuffle, &mut rng, seed, crit);
            }
        }

        let mut x = x0.clone();
        let mut changes = 0usize;
        let mut trace = (crit.track_energy && self.activation.is_discrete())
            .then(|| self.energy(&x).map(|e| vec![e]))
            .transpose()?;
        for sweep in 1..=crit.max_iters {
            if shuffle {
                order.shuffle(&mut rng);
            }
            let mut sweep_changes = 0;
            for &i in &order {
                let next = self.serial_step(&x, i)?;
                if next.row(i) != x.row(i) {
                    sweep_changes += 1;
                    x = next;
                }
                if let Some(t) = trace.as_mut() {
                    t.push(self.energy(&x)?);
                }
            }
            changes += sweep_changes;
            if sweep_changes == 0 {
                return Ok(RunReport {
                    cycle_states: vec![x.clone()],
                    final_state: x,
                    iterations: sweep,
                    outcome: Outcome::Stable,
                    energy_trace: trace,
                    schedule_seed: seed,
                    state_changes: changes,
                });
            }
        }
        Ok(RunReport {
            final_state: x,
            iterations: crit.max_iters,
            outcome: Outcome::BudgetExhausted,
            energy_trace: trace,
            schedule_seed: seed,
            state_changes: changes,
            cycle_states: Vec::new(),
        })
    }

    fn run_serial_labels(
        &self,
        start: ClusteringMatrix,
        order: &mut [usize],
        shuffle: bool,
        rng: &mut rand_chacha::ChaCha8Rng,
        seed: u64,
        crit: &ConvergenceCriterion,
    ) -> Result<RunReport> {
        let d = self.d();
        let mut labels = start.labels().to_vec();
        let mut energy = self.energy(&start.to_dense())?;
        let mut trace = crit.track_energy.then(|| vec![energy]);
        let mut changes = 0usize;
        let mut outcome = Outcome::BudgetExhausted;
        let mut iterations = crit.max_iters;
        for sweep in 1..=crit.max_iters {
            if shuffle {
                order.shuffle(rng);
            }
            let mut sweep_changes = 0;
            for &k in order.iter() {
                let h = self.pre_activation_row_labels(&labels, k);
                let new = argmax(&h).unwrap_or(0);
                let old = labels[k];
                if new != old {
                    // single-row delta e_new - e_old
                    energy += -2.0 * (h[new] - h[old]) - 2.0 * self.weights.get(k, k);
                    labels[k] = new;
                    sweep_changes += 1;
                }
                if let Some(t) = trace.as_mut() {
                    t.push(energy);
                }
            }
            changes += sweep_changes;
            if sweep_changes == 0 {
                outcome = Outcome::Stable;
                iterations = sweep;
                break;
            }
        }
        let final_state = ClusteringMatrix::from_labels_unchecked(labels, d).to_dense();
        Ok(RunReport {
            cycle_states: if outcome == Outcome::Stable {
                vec![final_state.clone()]
            } else {
                Vec::new()
            },
            final_state,
            iterations,
            outcome,
            energy_trace: trace,
            schedule_seed: seed,
            state_changes: changes,
        })
    }

    /// Parallel mode until the new state repeats one of the last
    /// `crit.window` states: exactly for Classification, within `epsilon`
    /// (on directions when `crit.normalize`) otherwise.
    pub fn run_parallel(&self, x0: &StateMatrix, crit: &ConvergenceCriterion) -> Result<RunReport> {
        self.check_state(x0)?;
        crit.validate()?;
        let exact = self.activation.is_discrete();
        let mut history: VecDeque<StateMatrix> = VecDeque::with_capacity(crit.window + 1);
        history.push_front(x0.clone());
        let mut changes = 0usize;
        for step in 1..=crit.max_iters {
            let next = self.parallel_step(&history[0])?;
            changes += (0..self.n())
                .filter(|&i| next.row(i) != history[0].row(i))
                .count();
            let period = history.iter().position(|prev| {
                if exact {
                    *prev == next
                } else {
                    crit.distance(prev, &next) < crit.epsilon
                }
            });
            if let Some(k) = period.map(|p| p + 1) {
                let mut cycle: Vec<StateMatrix> = history.iter().take(k - 1).rev().cloned().collect();
                cycle.push(next.clone());
                return Ok(RunReport {
                    final_state: next,
                    iterations: step,
                    outcome: Outcome::from_period(k),
                    energy_trace: None,
                    schedule_seed: 0,
                    state_changes: changes,
                    cycle_states: cycle,
                });
            }
            history.push_front(next);
            history.truncate(crit.window);
        }
        Ok(RunReport {
            final_state: history.pop_front().expect("history is never empty"),
            iterations: crit.max_iters,
            outcome: Outcome::BudgetExhausted,
            energy_trace: None,
            schedule_seed: 0,
            state_changes: changes,
            cycle_states: Vec::new(),
        })
    }
}
