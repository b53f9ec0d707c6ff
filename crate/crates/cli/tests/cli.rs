use std::path::Path;
use std::process::Command as Process;

use clap::Parser;
use zdlab_cli::{run, Cli, CliError};

fn exec(args: &[&str]) -> Result<String, CliError> {
    let cli = Cli::try_parse_from(std::iter::once("zdlab").chain(args.iter().copied())).expect("arguments parse");
    let mut out = Vec::new();
    run(cli, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn binary(args: &[&str]) -> (i32, String, String) {
    let output = Process::new(env!("CARGO_BIN_EXE_zdlab")).args(args).output().unwrap();
    (
        output.status.code().unwrap(),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SWEEP: &str = r#"{
    "topology": {"type": "mesh", "n": 30, "seed": 4, "density": 0.2},
    "scale": {"a": 2, "k": 1, "b": 3},
    "k_range": {"k_min": 1, "k_max": 4, "step": 1},
    "ga": {"population_size": 20, "generations": 15},
    "ratio": {"mode": "monte_carlo", "rounds": 200},
    "repetitions": 3,
    "seed": 11
}"#;

#[test]
fn synth_report_for_the_three_player_example() {
    let text = exec(&["synth", "--players", "3", "--alliance", "2", "--r", "9", "--l", "3", "--json"]).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((report["phi"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-12);
    assert!(report["residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["l_range"][0].as_f64(), Some(3.0));
    assert_eq!(report["l_range"][1].as_f64(), Some(7.0));
    assert_eq!(report["f"].as_array().unwrap().len(), 8);
}

#[test]
fn baseline_at_the_reward_end_pins_the_outsider_there() {
    let text = exec(&["synth", "--players", "3", "--l", "7", "--json"]).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["menu"][0].as_f64(), Some(7.0));
    exec(&["verify", "--players", "3", "--l", "7", "--draws", "10", "--seed", "3"]).unwrap();
}

#[test]
fn baseline_outside_the_range_is_infeasible() {
    let err = exec(&["synth", "--players", "3", "--l", "8"]).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("l_max = 7"), "{err}");
    let (code, _, stderr) = binary(&["synth", "--players", "3", "--l", "8", "--seed", "1"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("infeasible"));
}

#[test]
fn exit_codes() {
    assert_eq!(binary(&["verify", "--players", "3", "--l", "4", "--seed", "2"]).0, 0);
    assert_eq!(binary(&["topo", "--topology", "grid", "--n", "5"]).0, 2);
    assert_eq!(binary(&["topo", "--topology", "ring", "--n", "2"]).0, 2);
    assert_eq!(binary(&["sweep", "--config", "/definitely/missing.json"]).0, 2);
    assert_eq!(binary(&["field", "--topology", "star", "--n", "5", "--zd", "0", "--scale-a", "0", "--scale-b", "1"]).0, 2);
    assert_eq!(binary(&["opt", "--topology", "star", "--n", "80", "--k", "10", "--exhaustive"]).0, 2);
}

#[test]
fn topo_metrics_field_and_opt_agree() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("star.txt");
    let graph = graph.to_str().unwrap();
    exec(&["topo", "--topology", "star", "--n", "80", "--out", graph, "--seed", "0"]).unwrap();
    let metrics_csv = dir.path().join("metrics.csv");
    let summary = exec(&["metrics", "--graph", graph, "--out", metrics_csv.to_str().unwrap()]).unwrap();
    assert!(summary.contains("mean degree 1.9750"), "{summary}");
    let metrics = std::fs::read_to_string(&metrics_csv).unwrap();
    assert!(metrics.starts_with("# zdlab-v1\nnode,degree,betweenness\n0,79,3081"));

    let field: serde_json::Value =
        serde_json::from_str(&exec(&["field", "--graph", graph, "--zd", "0", "--json"]).unwrap()).unwrap();
    assert!((field["objective"].as_f64().unwrap() - 57.754).abs() < 1e-3);
    assert!((field["expected_ratio"].as_f64().unwrap() - 0.7345).abs() < 1e-4);

    let opt: serde_json::Value = serde_json::from_str(
        &exec(&["opt", "--graph", graph, "--k", "1", "--generations", "30", "--seed", "9", "--json"]).unwrap(),
    )
    .unwrap();
    assert_eq!(opt["zd_set"], serde_json::json!([0]));
    assert_eq!(opt["history"].as_array().unwrap().len(), 31);
}

#[test]
fn field_writes_per_node_rows() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = dir.path().join("nodes.csv");
    let text = exec(&[
        "field", "--topology", "ring", "--n", "6", "--zd", "2", "--mode", "monte-carlo", "--rounds", "500",
        "--nodes", nodes.to_str().unwrap(),
    ])
    .unwrap();
    assert!(text.contains("sampled ratio"));
    let rows = std::fs::read_to_string(nodes).unwrap();
    assert_eq!(rows.lines().count(), 2 + 6);
    assert!(rows.contains("\n2,true,"));
}

#[test]
fn ingest_builds_graph_from_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(dir.path(), "contacts.dat", "# a b start end\nA B 0 10\nA B 20 30\nB C 5 6\n");
    let out = dir.path().join("g.txt");
    exec(&["ingest", "--trace", &trace, "--min-contacts", "2", "--out", out.to_str().unwrap()]).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "V 3\n0 1\n");
    let bad = write(dir.path(), "bad.dat", "A B\nA\n");
    let err = exec(&["ingest", "--trace", &bad]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("line 2"), "{err}");
}

#[test]
fn sweep_output_is_reproducible_to_the_byte() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "cfg.json", SWEEP);
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    exec(&["sweep", "--config", &config, "--output", first.to_str().unwrap()]).unwrap();
    exec(&["sweep", "--config", &config, "--output", second.to_str().unwrap()]).unwrap();
    let a = std::fs::read(&first).unwrap();
    assert_eq!(a, std::fs::read(&second).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a_summary.csv")).unwrap(),
        std::fs::read(dir.path().join("b_summary.csv")).unwrap()
    );

    let text = String::from_utf8(a).unwrap();
    let body = text.strip_prefix("# zdlab-v1\n").expect("version line first");
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.unwrap();
        let coop: f64 = record[col("mean_regular_coop")].parse().unwrap();
        let ratio: f64 = record[col("expected_ratio")].parse().unwrap();
        assert!(coop > 0.0 && coop < 1.0);
        assert!(ratio > 0.0 && ratio <= 1.0);
        assert!(!record[col("monte_carlo_ratio")].is_empty());
        assert!(record[col("wall_ms")].is_empty());
        rows += 1;
    }
    assert_eq!(rows, 4 * 3);
}

#[test]
fn sweep_seed_flag_changes_the_search() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "cfg.json", SWEEP);
    let a = exec(&["sweep", "--config", &config, "--seed", "1"]).unwrap();
    let b = exec(&["sweep", "--config", &config, "--seed", "2"]).unwrap();
    assert!(a.starts_with("# zdlab-v1\nnetwork,k,repetitions,"));
    assert_ne!(a, b);
}

#[test]
fn sweep_rejects_bad_configs_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let low_r = write(dir.path(), "low.json", &SWEEP.replace(r#""a": 2, "k": 1, "b": 3"#, r#""a": 0, "k": 1, "b": 1"#));
    assert_eq!(exec(&["sweep", "--config", &low_r]).unwrap_err().exit_code(), 2);
    let unknown = write(dir.path(), "unk.json", &SWEEP.replace(r#""repetitions": 3"#, r#""repetitions": 3, "reps": 2"#));
    assert_eq!(exec(&["sweep", "--config", &unknown]).unwrap_err().exit_code(), 2);
    let big_k = write(dir.path(), "k.json", &SWEEP.replace(r#""k_max": 4"#, r#""k_max": 30"#));
    assert_eq!(exec(&["sweep", "--config", &big_k]).unwrap_err().exit_code(), 2);
}

#[test]
fn timing_column_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SWEEP.replace(r#""seed": 11"#, r#""seed": 11, "record_timing": true"#).replace(r#""repetitions": 3"#, r#""repetitions": 1"#);
    let config = write(dir.path(), "cfg.json", &cfg);
    let out = dir.path().join("t.csv");
    exec(&["sweep", "--config", &config, "--output", out.to_str().unwrap()]).unwrap();
    let text = std::fs::read_to_string(out).unwrap();
    let last = text.lines().last().unwrap();
    assert!(!last.ends_with(','), "{last}");
}
