use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dhn::datasets;
use dhn::io::ResultDocument;

fn dhn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhn"))
        .args(args)
        .env_remove("DHN_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(dhn(&["--help"]).status.code(), Some(0));
    assert_eq!(dhn(&["cluster"]).status.code(), Some(2));
    assert_eq!(dhn(&["cluster", "--method", "kmeans"]).status.code(), Some(2));
    let out = dhn(&["cluster", "--method", "newman", "--dim", "3"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("--dim"));
    assert_eq!(dhn(&["cluster", "--method", "cleora"]).status.code(), Some(2));
    assert_eq!(dhn(&["cluster", "--method", "lms", "--window", "0"]).status.code(), Some(2));
}

#[test]
fn parse_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "a b\nb c x\n");
    let out = dhn(&["cluster", "--method", "lms", "--input", &bad]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    let empty = write(dir.path(), "empty.txt", "# nothing\n");
    assert_eq!(dhn(&["cluster", "--method", "lms", "--input", &empty]).status.code(), Some(3));
    let missing = dir.path().join("missing.txt");
    assert_eq!(dhn(&["cluster", "--method", "lms", "--input", missing.to_str().unwrap()]).status.code(), Some(3));
    let asym = write(dir.path(), "asym.txt", "a b 1\nb a 2\n");
    assert_eq!(dhn(&["cluster", "--method", "lms", "--input", &asym, "--directed-reject"]).status.code(), Some(3));
    assert_eq!(dhn(&["cluster", "--method", "lms", "--input", &asym]).status.code(), Some(0));
}

#[test]
fn degenerate_graph_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(dir.path(), "zero.txt", "a b 0\n");
    let out = dhn(&["cluster", "--method", "lms", "--input", &zero]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn document_on_stdout_and_seed_from_env() {
    let out = dhn(&["cluster", "--method", "gnm", "--seed", "5"]);
    assert!(out.status.success());
    let mut by_flag = ResultDocument::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(by_flag.format_version, 1);
    assert_eq!(by_flag.nodes, 34);
    assert_eq!(by_flag.assignment[0].node, "1");

    let out = Command::new(env!("CARGO_BIN_EXE_dhn"))
        .args(["cluster", "--method", "gnm"])
        .env("DHN_SEED", "5")
        .output()
        .unwrap();
    let mut by_env = ResultDocument::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    by_flag.wall_time_ms = None;
    by_env.wall_time_ms = None;
    assert_eq!(by_flag, by_env);
}

#[test]
fn eval_reads_text_assignments() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", "a b\n");
    let split = write(dir.path(), "split.txt", "a 0\nb 1\n");
    let out = dhn(&["eval", "--input", &graph, "--assignment", &split]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("modularity -5.0000000000000000e-1"), "{text}");
    assert!(text.contains("d_cut 2.0000000000000000e0"), "{text}");

    let unknown = write(dir.path(), "unknown.txt", "a 0\nzebra 1\n");
    let out = dhn(&["eval", "--input", &graph, "--assignment", &unknown]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("zebra"));
}

#[test]
fn cleora_writes_embedding_next_to_document() {
    let dir = tempfile::tempdir().unwrap();
    let output = dir.path().join("run.json");
    let out = dhn(&["cluster", "--method", "cleora", "--dim", "4", "--output", output.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = ResultDocument::from_json(&fs::read_to_string(&output).unwrap()).unwrap();
    let emb_path = doc.embedding_path.clone().unwrap();
    assert!(emb_path.ends_with("run.json.emb"));
    let (labels, m) = dhn::embedding::read_embedding(fs::read(&emb_path).unwrap().as_slice()).unwrap();
    assert_eq!(labels.len(), 34);
    assert_eq!(m.ncols(), 4);
    assert_eq!(doc.config.cleora_iterations, Some(3));
}

#[test]
fn generate_writes_bundled_graphs() {
    let out = dhn(&["generate", "karate"]);
    assert!(out.status.success());
    let g = dhn::io::read_edge_list(&out.stdout[..], Default::default()).unwrap();
    assert_eq!(g, datasets::karate());
    let out = dhn(&["generate", "ring", "--count", "3", "--size", "4"]);
    let g = dhn::io::read_edge_list(&out.stdout[..], Default::default()).unwrap();
    assert_eq!(g.volume(), datasets::ring_of_cliques(3, 4).volume());
}
