//! Drives the command-line front end on files in a temporary directory.

use std::fs;
use std::path::Path;

use hyperfj::cli::run_args;
use hyperfj::io::{load_arc_list, read_report_csv, read_report_json};
use serde_json::Value;

fn write_toy(dir: &Path) -> (String, String) {
    let edges = dir.join("toy.txt");
    fs::write(&edges, "# four groups\n1,2\n1,2,4\n1,3,6\n2,3,5\n7\n").unwrap();
    let x = dir.join("x.txt");
    fs::write(&x, "0.1\n0.2\n0.3\n0.4\n0.5\n0.6\n0.7\n").unwrap();
    (edges.display().to_string(), x.display().to_string())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn stats_counts_singletons() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _) = write_toy(dir.path());
    let v = json(&run_args(["hyperfj", "stats", "--hyperedges", &edges]).unwrap());
    assert_eq!(v["nodes"], 7);
    assert_eq!(v["hyperedges"], 4);
    assert_eq!(v["singletons_removed"], 1);
    assert_eq!(v["isolated_nodes"], 1);
    assert_eq!(v["directed_arcs"], 18);
}

#[test]
fn clique_solve_conserves_total_opinion() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, x) = write_toy(dir.path());
    let text = run_args([
        "hyperfj", "solve", "--hyperedges", &edges, "--opinions", &x, "--projection", "clique",
    ])
    .unwrap();
    let v = json(&text);
    let sx = v["overall_internal"].as_f64().unwrap();
    let sz = v["overall_expressed"].as_f64().unwrap();
    assert!((sx - 2.8).abs() < 1e-12);
    assert!((sz - sx).abs() < 1e-12);
    assert_eq!(v["config"]["command"], "solve");
    assert_eq!(v["config"]["args"]["model"]["projection"], "clique");
}

#[test]
fn iterate_and_exact_reports_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, x) = write_toy(dir.path());
    let mut paths = Vec::new();
    for method in ["exact", "iterate"] {
        let out = dir.path().join(format!("{method}.csv"));
        let printed = run_args([
            "hyperfj", "solve", "--hyperedges", &edges, "--opinions", &x, "--method", method,
            "--format", "csv", "--out", out.to_str().unwrap(),
        ])
        .unwrap();
        assert!(printed.is_empty());
        paths.push(out);
    }
    let (xa, za) = read_report_csv(&paths[0]).unwrap();
    let (xb, zb) = read_report_csv(&paths[1]).unwrap();
    assert_eq!(xa, xb);
    for (a, b) in za.iter().zip(&zb) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn sample_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, x) = write_toy(dir.path());
    let out = dir.path().join("s.json");
    run_args([
        "hyperfj", "sample", "--hyperedges", &edges, "--opinions", &x, "--tau", "2000", "--seed",
        "4", "--workers", "2", "--out", out.to_str().unwrap(),
    ])
    .unwrap();
    let r = read_report_json(&out).unwrap();
    assert_eq!(r.tau, Some(2000));
    assert_eq!(r.seed, Some(4));
    assert_eq!(r.n, 7);
    assert!(r.z.is_empty(), "per-node values live in the CSV report");

    let csv = dir.path().join("s.csv");
    run_args([
        "hyperfj", "sample", "--hyperedges", &edges, "--opinions", &x, "--tau", "2000", "--seed",
        "4", "--format", "csv", "--out", csv.to_str().unwrap(),
    ])
    .unwrap();
    let (xs, zs) = read_report_csv(&csv).unwrap();
    assert_eq!(xs.len(), 7);
    // The isolated node's estimate is exact.
    assert_eq!(zs[6], 0.7);
}

#[test]
fn compare_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _) = write_toy(dir.path());
    let v = json(
        &run_args(["hyperfj", "compare", "--hyperedges", &edges, "--tau", "20000", "--workers", "2"])
            .unwrap(),
    );
    assert!(v["max_abs_error"].as_f64().unwrap() < 0.02);
    assert!(v["within_five_stderr"].as_f64().unwrap() > 0.8);
}

#[test]
fn project_then_enumerate() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _) = write_toy(dir.path());
    let arcs = dir.path().join("arcs.tsv");
    run_args([
        "hyperfj", "project", "--hyperedges", &edges, "--gamma", "uniform", "--out",
        arcs.to_str().unwrap(),
    ])
    .unwrap();
    let g = load_arc_list(&arcs).unwrap();
    assert_eq!(g.node_count(), 7);
    assert_eq!(g.arc_count(), 18);

    let v = json(&run_args(["hyperfj", "enumerate", "--arcs", arcs.to_str().unwrap(), "--matrix"]).unwrap());
    let omega = v["omega"].as_array().unwrap();
    for row in omega {
        let s: f64 = row.as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn simplex_input_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tiny-nverts.txt"), "2\n3\n1\n").unwrap();
    fs::write(dir.path().join("tiny-simplices.txt"), "10\n20\n10\n30\n40\n50\n").unwrap();
    let v = json(
        &run_args([
            "hyperfj", "stats", "--dataset", "tiny", "--dataset-dir", dir.path().to_str().unwrap(),
        ])
        .unwrap(),
    );
    assert_eq!(v["nodes"], 5);
    assert_eq!(v["hyperedges"], 2);

    let e = run_args(["hyperfj", "stats", "--dataset", "missing", "--dataset-dir", "/nonexistent"])
        .unwrap_err();
    assert_eq!(e.kind(), "io");

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0.5\n").unwrap();
    let (edges, _) = write_toy(dir.path());
    let e = run_args(["hyperfj", "solve", "--hyperedges", &edges, "--opinions", bad.to_str().unwrap()])
        .unwrap_err();
    assert_eq!(e.kind(), "config");

    let e = run_args(["hyperfj", "solve", "--hyperedges", &edges, "--dense-limit", "3"]).unwrap_err();
    assert_eq!(e.kind(), "dynamics");
}

#[test]
fn bench_emits_one_point_per_size() {
    let v = json(&run_args(["hyperfj", "bench", "--sizes", "800,1600", "--tau", "10", "--repeats", "1"]).unwrap());
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 2);
    assert!(pts[1]["n_plus_m"].as_u64().unwrap() > pts[0]["n_plus_m"].as_u64().unwrap());
}
