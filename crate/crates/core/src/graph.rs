use nalgebra::{DMatrix, DVector};

use crate::error::{DhnError, Result};
use crate::linalg::Weights;

/// Weighted graph on nodes `0..n` with an edge-weight matrix `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    weights: Weights,
    labels: Option<Vec<String>>,
}

impl WeightedGraph {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        Ok(Self::from_weights(Weights::from_dense(weights)?))
    }

    /// Like [`WeightedGraph::new`] but rejects asymmetric weights.
    pub fn symmetric(weights: DMatrix<f64>) -> Result<Self> {
        let g = Self::new(weights)?;
        g.ensure_symmetric()?;
        Ok(g)
    }

    pub fn from_weights(weights: Weights) -> Self {
        WeightedGraph { weights, labels: None }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(DhnError::shape(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// External identifier of node `i`, falling back to its 1-based index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => (i + 1).to_string(),
        }
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.weights.row_sum(i)
    }

    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), (0..self.n()).map(|i| self.degree(i)))
    }

    /// `Vol(G) = Σ_ij W_ij`.
    pub fn volume(&self) -> f64 {
        self.weights.total()
    }

    pub fn is_symmetric(&self) -> bool {
        self.weights.is_symmetric()
    }

    pub fn ensure_symmetric(&self) -> Result<()> {
        match self.weights.asymmetry() {
            None => Ok(()),
            Some((i, j)) => Err(DhnError::invalid(format!(
                "weight matrix is not symmetric at ({}, {})",
                i + 1,
                j + 1
            ))),
        }
    }
}
