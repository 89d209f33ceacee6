//! Multidimensional Hopfield networks (DHNs) for graph clustering.
//!
//! A network is a triple `(W, B, F)` acting on an `n × d` state matrix. With
//! the classification activation it performs greedy d-cut descent; on the
//! modularity matrix it becomes Louvain-style local search; with the Stiefel
//! projection it is a multidimensional Newman method; with row-wise l2
//! normalization it is Cleora embedding propagation.

pub mod clustering;
pub mod datasets;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod modularity;
pub mod network;
pub mod stiefel;

pub use clustering::{
    brute_force_min_dcut, build_extended_graph, d_cut_value, d_cut_via_trace, kappa_policy, stable_states_census,
    Clustering, ClusteringMatrix, ExtendedGraph, KappaPolicy,
};
pub use embedding::{l2_normalize_rows, run_cleora, EmbeddingMatrix};
pub use error::{DhnError, Result};
pub use graph::WeightedGraph;
pub use linalg::Weights;
pub use modularity::{
    build_lms_network, louvain_update, modularity_matrix, modularity_score, newman_bisect, power_iteration,
    power_method, run_lms, run_lms_from, run_plms, ModularityMatrix,
};
pub use network::{
    argmax, classify, classify_rows, Activation, ConvergenceCriterion, DhnNetwork, Outcome, RunReport, Schedule,
    StateMatrix,
};
pub use stiefel::{run_gnm, run_gnm_plus_lms, run_sgnm, stiefel_project, StiefelFrame};
