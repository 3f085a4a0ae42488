use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hspso::experiment::{parse_run_stats_csv, parse_summary_csv, reflag, summarize_rows, CSV_VERSION_LINE};
use hspso::Graph;

fn hspso(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hspso"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("HSPSO_THREADS", "0")
        .output()
        .expect("spawn hspso")
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = hspso(args, out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn reference(name: &str) -> String {
    format!("{}/data/reference_designs/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn bench_writes_versioned_files() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&["bench", "--objective", "f4", "--iters", "20", "--runs", "2", "--dim", "5"], dir.path());
    assert!(stdout.contains("mean_R="));
    for name in ["runs.csv", "run_stats.csv", "summary.csv"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().next(), Some(CSV_VERSION_LINE));
        assert!(text.contains("rng=ChaCha8"));
        assert!(text.ends_with('\n'));
    }
    let runs = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    // two runs, iterations 0..=20
    assert_eq!(data_rows(&runs).len(), 2 * 21);
}

#[test]
fn bench_runs_use_consecutive_seeds() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["bench", "--iters", "5", "--runs", "3", "--seed", "40", "--dim", "4"], dir.path());
    let rows = parse_run_stats_csv(&fs::read_to_string(dir.path().join("run_stats.csv")).unwrap()).unwrap();
    assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![40, 41, 42]);
}

#[test]
fn out_of_range_lambda_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = hspso(&["bench", "--lambda", "1.2", "--iters", "5", "--runs", "1"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda"));
}

#[test]
fn odd_ring_degree_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = hspso(&["bench", "--k", "3", "--iters", "5", "--runs", "1"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn pure_si_bench_has_zero_fraction() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["bench", "--objective", "f5", "--lambda", "0", "--iters", "30", "--runs", "3", "--dim", "6"], dir.path());
    let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows = parse_summary_csv(&text).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].mean_p, 0.0);
}

#[test]
fn sweep_rows_and_reflag() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["sweep", "--lambda-grid", "0:1:0.5", "--iters", "40", "--runs", "2", "--dim", "5"],
        dir.path(),
    );
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows = parse_summary_csv(&text).unwrap();
    assert_eq!(rows.iter().map(|r| r.lambda).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
    assert_eq!(rows.iter().filter(|r| r.is_best).count(), 1);
    assert_eq!(reflag(&rows), rows);
    let best = rows.iter().find(|r| r.is_best).unwrap();
    assert!(rows.iter().all(|r| best.mean_r <= r.mean_r));
}

#[test]
fn run_stats_reaggregate_to_summary() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["sweep", "--lambda-grid", "0.2:0.4:0.1", "--k-grid", "2,4", "--iters", "25", "--runs", "3", "--dim", "4"],
        dir.path(),
    );
    let stats = parse_run_stats_csv(&fs::read_to_string(dir.path().join("run_stats.csv")).unwrap()).unwrap();
    let written = parse_summary_csv(&fs::read_to_string(dir.path().join("sweep.csv")).unwrap()).unwrap();
    let again = summarize_rows("f1", &stats).unwrap();
    assert_eq!(written.len(), 6);
    assert_eq!(again, written);
    for k in [2, 4] {
        assert_eq!(written.iter().filter(|r| r.k == k && r.is_best).count(), 1);
    }
}

#[test]
fn thinned_trajectories_keep_last_iteration() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["bench", "--iters", "23", "--runs", "1", "--thin", "10", "--dim", "3"], dir.path());
    let text = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    let iters: Vec<&str> = data_rows(&text).iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(iters, vec!["0", "10", "20", "23"]);
}

#[test]
fn json_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"objective": "f6", "iters": 7, "runs": 2, "dim": 3, "lambda": 0.5}"#).unwrap();
    ok(&["bench", "--config", cfg.to_str().unwrap(), "--runs", "1"], dir.path());
    let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows = parse_summary_csv(&text).unwrap();
    assert_eq!((rows[0].objective.as_str(), rows[0].runs, rows[0].lambda), ("f6", 1, 0.5));
    assert!(text.contains("iters=7"));

    fs::write(&cfg, r#"{"iterations": 7}"#).unwrap();
    assert!(!hspso(&["bench", "--config", cfg.to_str().unwrap()], dir.path()).status.success());
}

#[test]
fn exported_graph_round_trips_and_is_reusable() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    ok(
        &[
            "bench", "--topology", "small-world", "--k", "4", "--beta", "0.3", "--iters", "3", "--runs", "1",
            "--dim", "3", "--export-graph", edges.to_str().unwrap(),
        ],
        dir.path(),
    );
    let g = Graph::from_edge_list(&fs::read_to_string(&edges).unwrap()).unwrap();
    assert_eq!((g.node_count(), g.edge_count()), (50, 100));

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = ["bench", "--iters", "10", "--runs", "2", "--dim", "3", "--graph", edges.to_str().unwrap()];
    ok(&args, &a);
    ok(&args, &b);
    assert_eq!(fs::read(a.join("runs.csv")).unwrap(), fs::read(b.join("runs.csv")).unwrap());
}

#[test]
fn filter_scores_reference_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let ga = reference("ga");
    let stdout = ok(&["filter", "--eval-only", "--coeffs", &ga], dir.path());
    let j2: f64 = stdout
        .trim()
        .strip_prefix("J2=")
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((j2 - 6.02763).abs() < 1e-4, "{j2}");
    assert!(stdout.contains("feasible=true"));
}

#[test]
fn filter_design_is_feasible_and_repeatable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["filter", "--iters", "60", "--runs", "2", "--n", "20"];
    ok(&args, a.path());
    ok(&args, b.path());
    for name in ["coefficients.json", "amplitude.csv", "filter_runs.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("coefficients.json")).unwrap()).unwrap();
    assert_eq!(record["feasible"], serde_json::Value::Bool(true));
    assert!(record["J2"].as_f64().unwrap() < 1e6);

    let amp = fs::read_to_string(a.path().join("amplitude.csv")).unwrap();
    let rows = data_rows_all(&amp);
    assert_eq!(rows.len(), 51);
    assert!(rows.iter().all(|r| r.split(',').count() == 51));

    // the emitted coefficients evaluate to the recorded cost
    let again = ok(
        &["filter", "--eval-only", "--coeffs", a.path().join("coefficients.json").to_str().unwrap()],
        a.path(),
    );
    let j2: f64 = again.trim()["J2=".len()..].split_whitespace().next().unwrap().parse().unwrap();
    assert_eq!(j2, record["J2"].as_f64().unwrap());
}

fn data_rows_all(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn eval_only_requires_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!hspso(&["filter", "--eval-only"], dir.path()).status.success());
}
