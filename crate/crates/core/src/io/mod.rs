//! Edge-list ingestion, result documents and the command implementations
//! behind the `dhn` binary.

pub mod commands;
pub mod edgelist;
pub mod result;

pub use commands::{cluster_command, eval_command, read_assignment, ClusterRun, RunConfig, Scores};
pub use edgelist::{load_edge_list, read_edge_list, write_edge_list, EdgeListOptions};
pub use result::{Method, ResultDocument, FORMAT_VERSION};
