//! The `concert-planner` binary, run as a subprocess.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_concert-planner"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn error_of(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "expected a single error line, got {stderr}");
    serde_json::from_str(lines[0]).unwrap()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

/// Synthetic concerts and cities in a fresh directory.
fn workspace(rows: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synthesize", "--rows", &rows.to_string(), "--cities", "25", "--seed", "3", "--out-dir", "."]);
    dir
}

#[test]
fn train_location_forest_beats_three_times_random() {
    let dir = workspace(800);
    std::fs::write(dir.path().join("presets.toml"), "seed = 2\n[forest]\nn_trees = 70\n").unwrap();
    ok(dir.path(), &["train", "--data", "concerts.csv", "--task", "location", "--model", "forest", "--config", "presets.toml", "--out", "b.json", "--report", "r.json"]);
    let report = read_json(dir.path().join("r.json"));
    let r = &report["reports"][0];
    assert_eq!(r["family"], "forest");
    assert_eq!(r["seed"], 2);
    assert!(r["scores"]["test"].as_f64().unwrap() >= 3.0 * 0.2);
    let bundle = read_json(dir.path().join("b.json"));
    assert_eq!(bundle["metadata"]["hyperparameters"]["location"]["n_trees"], 70);
}

#[test]
fn predict_from_one_row_csv_gives_a_distribution() {
    let dir = workspace(300);
    ok(dir.path(), &["train", "--data", "concerts.csv", "--cities", "cities.csv", "--out", "b.json"]);
    let text = std::fs::read_to_string(dir.path().join("concerts.csv")).unwrap();
    let one: Vec<&str> = text.lines().take(2).collect();
    std::fs::write(dir.path().join("one-row.csv"), one.join("\n") + "\n").unwrap();
    let out = ok(dir.path(), &["predict", "--bundle", "b.json", "--input", "one-row.csv", "--task", "location"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let p: f64 = v[0]["probabilities"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((p - 1.0).abs() <= 1e-9);

    std::fs::write(dir.path().join("q.json"), r#"[{"day":"Sun"},{"genres":["pop"],"venue_type":1}]"#).unwrap();
    ok(dir.path(), &["predict", "--bundle", "b.json", "--input", "q.json", "--task", "price", "--out", "prices.json"]);
    let prices = read_json(dir.path().join("prices.json"));
    assert_eq!(prices.as_array().unwrap().len(), 2);
    assert!(prices[0]["price"].as_f64().unwrap() > 0.0);
}

#[test]
fn benchmark_price_reports_constant_and_models_on_one_split() {
    let dir = workspace(300);
    let table = ok(dir.path(), &["benchmark", "--data", "concerts.csv", "--task", "price", "--report", "bench.json"]);
    assert!(table.contains("constant") && table.contains("sgd") && table.contains("svr"));
    let b = read_json(dir.path().join("bench.json"));
    let families: Vec<&str> = b["regression"].as_array().unwrap().iter().map(|r| r["family"].as_str().unwrap()).collect();
    assert_eq!(families, ["constant", "sgd", "svr"]);
    assert!(b["price_constant_train"].as_f64().unwrap() > 0.0);
    assert!(b["price_constant_full"].as_f64().unwrap() > 0.0);
    assert_eq!(b["n_train"], 240);
}

#[test]
fn benchmark_location_writes_confusion_grids() {
    let dir = workspace(200);
    ok(dir.path(), &["--quiet", "benchmark", "--data", "concerts.csv", "--task", "location", "--families", "forest,logistic", "--text", "t.txt", "--confusion-dir", "cm"]);
    let text = std::fs::read_to_string(dir.path().join("t.txt")).unwrap();
    assert!(text.contains("Benchmark (Low)") && text.contains("Benchmark (High)") && text.contains("Improvement"));
    let counts = std::fs::read_to_string(dir.path().join("cm/forest_counts.csv")).unwrap();
    assert_eq!(counts.lines().count(), 6);
    let total: u64 = counts.lines().skip(1).flat_map(|l| l.split(',').skip(1).map(|c| c.parse::<u64>().unwrap())).sum();
    assert_eq!(total, 40);
    assert!(dir.path().join("cm/logistic_normalized.csv").exists());
}

#[test]
fn tune_writes_trial_log_and_evaluate_scores_bundle() {
    let dir = workspace(300);
    ok(dir.path(), &["tune", "--data", "concerts.csv", "--task", "location", "--model", "forest", "--strategy", "grid", "--out", "b.json", "--report", "r.json", "--trials-csv", "trials.csv"]);
    let trials = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(trials.lines().next().unwrap(), "trial,seed,max_depth,min_samples_leaf,n_trees,score,status");
    assert_eq!(trials.lines().count(), 1 + 18);
    let r = read_json(dir.path().join("r.json"));
    assert_eq!(r["searches"][0]["n_trials"], 18);
    ok(dir.path(), &["evaluate", "--bundle", "b.json", "--data", "concerts.csv", "--task", "location", "--report", "e.json", "--confusion-dir", "cm"]);
    let e = read_json(dir.path().join("e.json"));
    assert_eq!(e["rows"], 300);
    assert!(e["accuracy"].as_f64().unwrap() > 0.2);

    ok(dir.path(), &["tune", "--data", "concerts.csv", "--task", "price", "--model", "sgd", "--trials", "3", "--out", "p.json", "--trials-csv", "t2.csv", "--log-durations"]);
    let t2 = std::fs::read_to_string(dir.path().join("t2.csv")).unwrap();
    assert!(t2.lines().next().unwrap().ends_with(",duration_ms"));
}

#[test]
fn ingest_and_cluster_cities() {
    let dir = workspace(200);
    ok(dir.path(), &["ingest", "--input", "concerts.csv", "--out", "clean.csv", "--summary", "s.json"]);
    let s = read_json(dir.path().join("s.json"));
    assert_eq!(s["rows"], 200);
    assert_eq!(s["columns"]["Class"]["missing"], 0);

    ok(dir.path(), &["cluster-cities", "--cities", "cities.csv", "--out", "km.json", "--assignments", "a.csv", "--concerts", "concerts.csv", "--labeled-out", "labeled.csv"]);
    let km = read_json(dir.path().join("km.json"));
    assert_eq!(km["k"], 5);
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a.lines().count(), 26);
    let labeled = std::fs::read_to_string(dir.path().join("labeled.csv")).unwrap();
    assert_eq!(labeled.lines().count(), 201);
}

#[test]
fn failures_print_one_json_line_and_exit_nonzero() {
    let dir = workspace(100);
    let e = error_of(&run(dir.path(), &["predict", "--bundle", "missing.json", "--input", "concerts.csv", "--task", "location"]));
    assert_eq!(e["error"]["kind"], "missing_file");

    let e = error_of(&run(dir.path(), &["train", "--data", "concerts.csv", "--model", "quantum", "--out", "b.json"]));
    assert_eq!(e["error"]["kind"], "unsupported_family");

    let e = error_of(&run(dir.path(), &["train", "--task", "location"]));
    assert_eq!(e["error"]["kind"], "usage");
    assert!(e["error"]["message"].as_str().unwrap().contains("--data"));

    std::fs::write(dir.path().join("bad.csv"), "average_price,latitude\n100,40\n").unwrap();
    let e = error_of(&run(dir.path(), &["train", "--data", "bad.csv", "--out", "b.json"]));
    assert_eq!(e["error"]["kind"], "schema_mismatch");

    std::fs::write(dir.path().join("corrupt.json"), "{\"format_version\": 1").unwrap();
    let e = error_of(&run(dir.path(), &["predict", "--bundle", "corrupt.json", "--input", "concerts.csv", "--task", "price"]));
    assert!(e["error"]["message"].as_str().is_some());
}

#[test]
fn all_subcommands_are_listed() {
    let help = String::from_utf8(bin().arg("--help").output().unwrap().stdout).unwrap();
    for cmd in ["ingest", "cluster-cities", "train", "tune", "evaluate", "benchmark", "predict", "serve", "synthesize"] {
        assert!(help.contains(cmd), "{cmd} missing from --help");
    }
}
