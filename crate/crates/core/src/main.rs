use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dhn::io::{cluster_command, eval_command, load_edge_list, write_edge_list, EdgeListOptions, Method, RunConfig};
use dhn::network::ConvergenceCriterion;
use dhn::{datasets, DhnError, WeightedGraph};

#[derive(Parser)]
#[command(name = "dhn", version, about = "Hopfield-network graph clustering and embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster (or embed) a graph and write a JSON result document.
    Cluster(ClusterArgs),
    /// Re-score a stored assignment against a graph.
    Eval {
        #[arg(long)]
        input: PathBuf,
        /// Result document or `label cluster` lines.
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long)]
        directed_reject: bool,
    },
    /// Write a bundled or synthetic graph as an edge list.
    Generate {
        #[arg(value_enum)]
        kind: GraphKind,
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        size: usize,
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, env = "DHN_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Karate,
    TwoEdges,
    Ring,
    Barbell,
    TwoComponent,
}

#[derive(clap::Args)]
struct ClusterArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Number of clusters / embedding width (ignored by lms, fixed at 2 for newman).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, env = "DHN_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = ConvergenceCriterion::default().epsilon)]
    epsilon: f64,
    #[arg(long, default_value_t = ConvergenceCriterion::default().window)]
    window: usize,
    #[arg(long, default_value_t = ConvergenceCriterion::default().max_iters)]
    max_iters: usize,
    /// Cleora propagation rounds.
    #[arg(long, default_value_t = dhn::embedding::DEFAULT_ITERATIONS)]
    iters: usize,
    /// Edge list; defaults to the bundled karate club graph.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Result document path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    directed_reject: bool,
}

fn load(input: Option<&PathBuf>, directed_reject: bool) -> dhn::Result<WeightedGraph> {
    match input {
        Some(path) => load_edge_list(path, EdgeListOptions { directed_reject }),
        None => Ok(datasets::karate()),
    }
}

fn cluster(args: ClusterArgs) -> dhn::Result<()> {
    let config = RunConfig {
        method: args.method,
        dim: args.dim,
        seed: args.seed,
        epsilon: args.epsilon,
        window: args.window,
        max_iters: args.max_iters,
        cleora_iterations: args.iters,
        directed_reject: args.directed_reject,
        input: args.input.as_ref().map(|p| p.display().to_string()),
        output: args.output.clone(),
    };
    let graph = load(args.input.as_ref(), args.directed_reject)?;
    let run = cluster_command(&config, &graph)?;
    log::info!(
        "{}: {} clusters, modularity {:.6}, {}",
        config.method.name(),
        run.document.clusters,
        run.document.modularity,
        run.document.outcome
    );
    match &args.output {
        Some(path) => run.write(&graph, path),
        None => {
            println!("{}", run.document.to_json()?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> dhn::Result<()> {
    match cli.command {
        Command::Cluster(args) => cluster(args),
        Command::Eval { input, assignment, directed_reject } => {
            let graph = load(Some(&input), directed_reject)?;
            let scores = eval_command(&graph, &assignment)?;
            println!("modularity {:.16e}", scores.modularity);
            println!("d_cut {:.16e}", scores.d_cut);
            println!("clusters {}", scores.clusters);
            Ok(())
        }
        Command::Generate { kind, count, size, p, seed, output } => {
            if size == 0 || count == 0 {
                return Err(DhnError::Usage("--size and --count must be positive".into()));
            }
            let mut buf = Vec::new();
            let graph = match kind {
                // verbatim, so node order matches the built-in default
                GraphKind::Karate => {
                    buf.extend_from_slice(datasets::KARATE_EDGE_LIST.as_bytes());
                    None
                }
                GraphKind::TwoEdges => Some(datasets::two_edges()),
                GraphKind::Ring => Some(datasets::ring_of_cliques(count, size)),
                GraphKind::Barbell => Some(datasets::barbell(size)),
                GraphKind::TwoComponent => Some(datasets::two_component(size, p, seed)),
            };
            if let Some(graph) = graph {
                if graph.volume() == 0.0 {
                    return Err(DhnError::Usage("generated graph has no edges".into()));
                }
                write_edge_list(&mut buf, &graph)?;
            }
            match output {
                Some(path) => std::fs::write(path, buf)?,
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
