use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::clustering::{d_cut_value, Clustering};
use crate::embedding::{run_cleora, write_embedding, EmbeddingMatrix, DEFAULT_ITERATIONS};
use crate::error::{DhnError, Result};
use crate::graph::WeightedGraph;
use crate::io::result::{ConfigEcho, Method, NodeAssignment, ResultDocument, FORMAT_VERSION};
use crate::modularity::{modularity_score, newman_bisect, run_lms, run_plms};
use crate::network::{classify_rows, Activation, ConvergenceCriterion, RunReport};
use crate::stiefel::{run_gnm, run_gnm_plus_lms, run_sgnm};

pub const DEFAULT_DIM: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    /// `None` picks the method default: `n` for lms, 2 otherwise.
    pub dim: Option<usize>,
    pub seed: u64,
    pub epsilon: f64,
    pub window: usize,
    pub max_iters: usize,
    pub cleora_iterations: usize,
    pub directed_reject: bool,
    pub input: Option<String>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(method: Method) -> Self {
        let crit = ConvergenceCriterion::default();
        RunConfig {
            method,
            dim: None,
            seed: 0,
            epsilon: crit.epsilon,
            window: crit.window,
            max_iters: crit.max_iters,
            cleora_iterations: DEFAULT_ITERATIONS,
            directed_reject: false,
            input: None,
            output: None,
        }
    }

    /// Effective state dimension for a graph with `n` nodes, after checking
    /// the method-specific constraints.
    pub fn resolve_dim(&self, n: usize) -> Result<usize> {
        let dim = match (self.method, self.dim) {
            (Method::Lms, _) => n,
            (Method::Newman, None | Some(2)) => 2,
            (Method::Newman, Some(d)) => {
                return Err(DhnError::Usage(format!("newman always bisects; --dim must be 2, got {d}")))
            }
            (_, None) => DEFAULT_DIM,
            (_, Some(d)) => d,
        };
        if dim == 0 {
            return Err(DhnError::Usage("--dim must be at least 1".into()));
        }
        if matches!(self.method, Method::Gnm | Method::Sgnm | Method::GnmLms) && dim > n {
            return Err(DhnError::Usage(format!(
                "{} needs --dim <= number of nodes ({n}), got {dim}",
                self.method.name()
            )));
        }
        Ok(dim)
    }

    pub fn criterion(&self) -> Result<ConvergenceCriterion> {
        let activation = match self.method {
            Method::Lms | Method::Plms => Activation::Classification,
            _ => Activation::StiefelProjection,
        };
        let crit = ConvergenceCriterion {
            epsilon: self.epsilon,
            window: self.window,
            max_iters: self.max_iters,
            ..ConvergenceCriterion::for_activation(activation)
        };
        crit.validate().map_err(|e| DhnError::Usage(e.to_string()))?;
        Ok(crit)
    }

    fn embedding_path(&self) -> Option<PathBuf> {
        self.output.as_ref().map(|o| {
            let mut s = o.clone().into_os_string();
            s.push(".emb");
            PathBuf::from(s)
        })
    }
}

/// Output of one `cluster` run.
#[derive(Clone, Debug)]
pub struct ClusterRun {
    pub document: ResultDocument,
    pub clustering: Clustering,
    pub embedding: Option<EmbeddingMatrix>,
}

impl ClusterRun {
    /// Writes the embedding (if any) and the JSON document to their paths.
    pub fn write(&self, graph: &WeightedGraph, output: &Path) -> Result<()> {
        if let (Some(emb), Some(path)) = (&self.embedding, &self.document.embedding_path) {
            let mut file = fs::File::create(path)?;
            write_embedding(&mut file, graph, emb)?;
        }
        fs::write(output, self.document.to_json()? + "\n")?;
        Ok(())
    }
}

/// Runs the configured method on `graph` and scores the result.
pub fn cluster_command(config: &RunConfig, graph: &WeightedGraph) -> Result<ClusterRun> {
    let dim = config.resolve_dim(graph.n())?;
    let crit = config.criterion()?;
    if config.method == Method::Cleora && config.output.is_none() {
        return Err(DhnError::Usage("cleora writes its embedding next to --output, which is required".into()));
    }
    let started = Instant::now();
    let mut embedding = None;
    let (clustering, report): (Clustering, Option<RunReport>) = match config.method {
        Method::Lms => {
            let (c, r) = run_lms(graph, &crit)?;
            (c, Some(r))
        }
        Method::Plms => {
            let (c, r) = run_plms(graph, dim, config.seed, &crit)?;
            (c, Some(r))
        }
        Method::Gnm => {
            let (c, r) = run_gnm(graph, dim, config.seed, &crit)?;
            (c, Some(r))
        }
        Method::Sgnm => {
            let (c, r) = run_sgnm(graph, dim, config.seed, &crit)?;
            (c, Some(r))
        }
        Method::GnmLms => {
            let (c, r) = run_gnm_plus_lms(graph, dim, config.seed, &crit)?;
            (c, Some(r))
        }
        Method::Newman => (newman_bisect(graph, config.seed, &crit)?, None),
        Method::Cleora => {
            let emb = run_cleora(graph, dim, config.cleora_iterations, config.seed)?;
            let c = classify_rows(emb.matrix()).to_clustering();
            embedding = Some(emb);
            (c, None)
        }
    };
    let modularity = modularity_score(graph, &clustering)?;
    let d_cut = d_cut_value(graph, &clustering)?;
    let elapsed = started.elapsed().as_secs_f64() * 1e3;

    let document = ResultDocument {
        format_version: FORMAT_VERSION,
        method: config.method,
        config: ConfigEcho {
            dim,
            seed: config.seed,
            epsilon: config.epsilon,
            window: config.window,
            max_iters: config.max_iters,
            cleora_iterations: (config.method == Method::Cleora).then_some(config.cleora_iterations),
            directed_reject: config.directed_reject,
            input: config.input.clone(),
        },
        nodes: graph.n(),
        clusters: clustering.nonempty_clusters(),
        assignment: (0..graph.n())
            .map(|i| NodeAssignment { node: graph.label(i), cluster: clustering.cluster_of(i) })
            .collect(),
        modularity,
        d_cut,
        energy_trace: report.as_ref().and_then(|r| r.energy_trace.clone()),
        iterations: report.as_ref().map_or(config.cleora_iterations, |r| r.iterations),
        outcome: report.as_ref().map_or_else(|| "completed".to_string(), |r| r.outcome.to_string()),
        embedding_path: embedding
            .as_ref()
            .and(config.embedding_path())
            .map(|p| p.to_string_lossy().into_owned()),
        wall_time_ms: Some(elapsed),
    };
    Ok(ClusterRun { document, clustering, embedding })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scores {
    pub modularity: f64,
    pub d_cut: f64,
    pub clusters: usize,
}

/// Reads an assignment, either a result document or `label cluster` lines,
/// and maps it onto the graph's node order.
pub fn read_assignment(graph: &WeightedGraph, text: &str) -> Result<Clustering> {
    let pairs: Vec<(String, usize, usize)> = if text.trim_start().starts_with('{') {
        ResultDocument::from_json(text)?
            .assignment
            .into_iter()
            .map(|a| (a.node, a.cluster, 0))
            .collect()
    } else {
        let mut pairs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match tokens.as_slice() {
                [label, cluster] => cluster.parse::<usize>().ok().map(|c| (label.to_string(), c)),
                _ => None,
            };
            let (label, cluster) = parsed.ok_or_else(|| DhnError::Parse {
                line: idx + 1,
                message: "expected `label cluster`".into(),
            })?;
            pairs.push((label, cluster, idx + 1));
        }
        pairs
    };

    let index: HashMap<String, usize> = (0..graph.n()).map(|i| (graph.label(i), i)).collect();
    let mut assignment: Vec<Option<usize>> = vec![None; graph.n()];
    for (label, cluster, line) in pairs {
        let &i = index.get(&label).ok_or_else(|| DhnError::Parse {
            line,
            message: format!("unknown node label {label:?}"),
        })?;
        assignment[i] = Some(cluster);
    }
    let assignment = assignment
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| DhnError::Parse {
                line: 0,
                message: format!("node {:?} has no cluster", graph.label(i)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Clustering::from_assignment(assignment))
}

/// Re-scores a stored assignment against `graph`.
pub fn eval_command(graph: &WeightedGraph, assignment_path: &Path) -> Result<Scores> {
    let text = fs::read_to_string(assignment_path)?;
    let clustering = read_assignment(graph, &text)?;
    Ok(Scores {
        modularity: modularity_score(graph, &clustering)?,
        d_cut: d_cut_value(graph, &clustering)?,
        clusters: clustering.nonempty_clusters(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    #[test]
    fn newman_rejects_other_dims() {
        let mut cfg = RunConfig::new(Method::Newman);
        cfg.dim = Some(3);
        assert!(matches!(cluster_command(&cfg, &datasets::karate()), Err(DhnError::Usage(_))));
        cfg.dim = None;
        let run = cluster_command(&cfg, &datasets::karate()).unwrap();
        assert!(run.clustering.d() == 2 && run.document.clusters <= 2);
    }

    #[test]
    fn gnm_dim_bounded_by_nodes() {
        let mut cfg = RunConfig::new(Method::Gnm);
        cfg.dim = Some(5);
        assert!(matches!(cluster_command(&cfg, &datasets::two_edges()), Err(DhnError::Usage(_))));
    }

    #[test]
    fn cleora_requires_output() {
        let cfg = RunConfig::new(Method::Cleora);
        assert!(matches!(cluster_command(&cfg, &datasets::karate()), Err(DhnError::Usage(_))));
    }

    #[test]
    fn bad_window_is_a_usage_error() {
        let mut cfg = RunConfig::new(Method::Lms);
        cfg.window = 0;
        assert!(matches!(cluster_command(&cfg, &datasets::karate()), Err(DhnError::Usage(_))));
    }

    #[test]
    fn text_assignments() {
        let g = datasets::single_edge().with_labels(vec!["a".into(), "b".into()]).unwrap();
        let c = read_assignment(&g, "a 0\nb 1\n").unwrap();
        assert_eq!(modularity_score(&g, &c).unwrap(), -0.5);
        let err = read_assignment(&g, "a 0\nzz 1\n").unwrap_err();
        assert!(err.to_string().contains("zz"), "{err}");
        let err = read_assignment(&g, "a 0\n").unwrap_err();
        assert!(err.to_string().contains("\"b\""), "{err}");
        assert!(read_assignment(&g, "a x\n").is_err());
    }

    #[test]
    fn single_cluster_has_zero_cut() {
        let g = datasets::karate();
        let text: String = (0..g.n()).map(|i| format!("{} 7\n", g.label(i))).collect();
        let c = read_assignment(&g, &text).unwrap();
        assert_eq!(d_cut_value(&g, &c).unwrap(), 0.0);
    }
}
