use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qdesync");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut full: Vec<&str> = args.to_vec();
    let out = dir.to_str().unwrap();
    full.extend(["--out", out]);
    run(&full)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn pair_saddle_reports_symmetric_solution() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["saddle", "--pair"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("r^2 = 10"), "{text}");
    assert!(text.contains("theta0 = 3.14159"), "{text}");
    let csv = read(dir.path(), "saddle.csv");
    assert!(csv.lines().nth(1).unwrap().contains("true"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = run(&["saddle", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_config_is_rejected_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[simulation]\ndt = -1\n").unwrap();
    let o = run_in(dir.path(), &["--config", cfg.to_str().unwrap(), "simulate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("simulation.dt"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    std::fs::write(&cfg, "[markov]\ngama1 = 1\n").unwrap();
    let o = run_in(dir.path(), &["--config", cfg.to_str().unwrap(), "saddle"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["ensemble", "--model", "pair", "--delta", "0.5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 9\n[markov]\ndelta = 0.02\n").unwrap();
    let out = dir.path().join("o");
    let o = run_in(&out, &["--config", cfg.to_str().unwrap(), "saddle", "--pair", "--delta", "0.04"]);
    assert!(o.status.success());
    let resolved = read(&out, "config.toml");
    assert!(resolved.contains("delta = 0.04"));
    assert!(resolved.contains("seed = 9"));
}

#[test]
fn manifest_lists_every_output_with_matching_hash() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["fp", "--delta", "0.013"]);
    assert!(o.status.success());
    let m: serde_json::Value = serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
    let outputs = m["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|x| x["path"] == "phase_distribution.csv"));
    for entry in outputs {
        let bytes = std::fs::read(dir.path().join(entry["path"].as_str().unwrap())).unwrap();
        assert_eq!(entry["bytes"].as_u64().unwrap(), bytes.len() as u64);
        assert_eq!(entry["sha256"].as_str().unwrap(), qdesync::cli::manifest::sha256_hex(&bytes));
    }
    assert_eq!(m["master_seed"], 1);
}

#[test]
fn ensembles_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["ensemble", "--model", "adler", "--delta", "0.013", "--trajectories", "40", "--t-end", "20", "--seed", "5"];
    let mut files = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(threads);
        let mut full = args.to_vec();
        full.extend(["--threads", threads]);
        assert!(run_in(&out, &full).status.success());
        files.push((read(&out, "ensemble.csv"), read(&out, "ensemble_histogram.csv")));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn seed_changes_the_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for seed in ["1", "2"] {
        let out = dir.path().join(seed);
        let args = ["ensemble", "--model", "adler", "--trajectories", "8", "--t-end", "5", "--seed", seed];
        assert!(run_in(&out, &args).status.success());
        files.push(read(&out, "ensemble.csv"));
    }
    assert_ne!(files[0], files[1]);
}
