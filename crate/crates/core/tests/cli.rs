use std::fs;
use std::path::Path;
use std::process::Command;

use sofa::artifact::{write_artifact, ArtifactFormat, ClusteringArtifact, LeftAssignment, RunParams};
use sofa::synthetic::GroundTruth;

fn sofa(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sofa")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = sofa(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn generate(dir: &Path) -> (String, String) {
    let d = dir.to_str().unwrap();
    ok(&["gen", "--n", "1500", "--k", "6", "--ell", "60", "--r", "25", "--p", "0.85", "--noise-degree", "4", "--seed", "3", "--out", d]);
    (format!("{d}/graph.adj"), format!("{d}/truth.tsv"))
}

#[test]
fn pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, truth) = generate(dir.path());
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    for (i, extra) in [vec!["--algo", "sofa"], vec!["--algo", "sofa-auto", "--mode", "bmf"], vec!["--algo", "static"]]
        .iter()
        .enumerate()
    {
        let outs: Vec<String> = (0..2).map(|r| p(&format!("c{i}_{r}.tsv"))).collect();
        let tels: Vec<String> = (0..2).map(|r| p(&format!("t{i}_{r}.jsonl"))).collect();
        for r in 0..2 {
            let mut args = vec!["run", "--input", &graph, "--k", "6", "--s", "25", "--seed", "9", "--out", &outs[r], "--telemetry", &tels[r]];
            args.extend(extra.iter().copied());
            ok(&args);
        }
        assert_eq!(fs::read(&outs[0]).unwrap(), fs::read(&outs[1]).unwrap());
        let metrics: Vec<String> = (0..2).map(|r| p(&format!("m{i}_{r}.json"))).collect();
        for r in 0..2 {
            ok(&["eval", "--input", &graph, "--clusters", &outs[r], "--ground-truth", &truth, "--out", &metrics[r]]);
        }
        let m0 = fs::read_to_string(&metrics[0]).unwrap();
        assert_eq!(m0, fs::read_to_string(&metrics[1]).unwrap());
        let v: serde_json::Value = serde_json::from_str(&m0).unwrap();
        assert!(v["quality"].as_f64().unwrap() >= 0.9, "{m0}");
    }
}

#[test]
fn eval_without_truth_reports_reconstruction_only() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, _) = generate(dir.path());
    let clusters = dir.path().join("c.json");
    let c = clusters.to_str().unwrap();
    ok(&["run", "--input", &graph, "--k", "6", "--s", "25", "--mode", "bmf", "--out", c, "--out-format", "json"]);
    let out = sofa(&["eval", "--input", &graph, "--clusters", c, "--clusters-format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["quality"].is_null());
    assert!(v["gain"].as_f64().unwrap() <= 1.0);
    let recall = v["recall"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&recall));
}

#[test]
fn truth_as_clustering_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, truth_path) = generate(dir.path());
    let truth = GroundTruth::read(&truth_path).unwrap();
    let artifact = ClusteringArtifact {
        params: RunParams {
            algo: "truth".into(),
            k: 6,
            theta: 0.0,
            alpha: 1.0,
            c_max: None,
            capacity: None,
            seed: 0,
        },
        right_clusters: truth.right.clone(),
        left: LeftAssignment::Exclusive(truth.left_cluster.iter().enumerate().map(|(u, &c)| (u, Some(c))).collect()),
    };
    let path = dir.path().join("truth_clusters.tsv");
    write_artifact(&artifact, &path, ArtifactFormat::Tsv).unwrap();
    let out = sofa(&["eval", "--input", &graph, "--clusters", path.to_str().unwrap(), "--ground-truth", &truth_path]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["quality"].as_f64(), Some(1.0));
    assert_eq!(v["left_quality"].as_f64(), Some(1.0));
}

#[test]
fn greedy_theory_mode_and_reduction_run() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, _) = generate(dir.path());
    let out = dir.path().join("g.tsv");
    let o = out.to_str().unwrap();
    ok(&["run", "--input", &graph, "--k", "6", "--algo", "greedy", "--theory-mode", "--p", "0.85", "--s", "25", "--out", o]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("#param\ttheta\t0.6375"), "{text}");
    ok(&["run", "--input", &graph, "--k", "6", "--algo", "rs-static", "--m-tilde", "100", "--out", o]);
    ok(&["run", "--input", &graph, "--k", "6", "--estimate-s", "--mode", "bmf", "--skip-grouping", "--out", o]);
}

#[test]
fn errors_set_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(sofa(&["gen", "--out", d]).status.code(), Some(2));
    assert_eq!(sofa(&["gen", "--n", "10", "--q", "0.1", "--noise-degree", "2", "--out", d]).status.code(), Some(2));
    assert_eq!(sofa(&["gen", "--n", "10", "--k", "2", "--ell", "2", "--r", "3", "--p", "0.1", "--q", "0.5", "--out", d]).status.code(), Some(1));
    assert_eq!(sofa(&["run", "--input", "/nonexistent", "--k", "2", "--out", d]).status.code(), Some(1));
    let (graph, _) = generate(dir.path());
    let o = dir.path().join("x.tsv");
    assert_eq!(
        sofa(&["run", "--input", &graph, "--k", "6", "--algo", "static", "--budget", "10", "--out", o.to_str().unwrap()]).status.code(),
        Some(1)
    );
    assert_eq!(
        sofa(&["run", "--input", &graph, "--k", "6", "--algo", "greedy", "--s", "25", "--out", o.to_str().unwrap()]).status.code(),
        Some(1)
    );
}
