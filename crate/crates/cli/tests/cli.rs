use std::path::Path;
use std::process::Command;

use accbound_cli::config::{parse_config, ExperimentConfig};
use accbound_cli::runner::{run_experiment, RunOptions, COMPARE_HEADER, K_TABLE_HEADER, SCALAR_HEADER, THEOREM1_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_accbound"))
}

fn reference() -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference.json");
    parse_config(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn config_round_trips() {
    let cfg = reference();
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    assert_eq!(parse_config(&text).unwrap(), cfg);
}

#[test]
fn table_k_header_and_values() {
    let out = bin().args(["table", "k", "--dist", "rademacher", "--delta", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], K_TABLE_HEADER.join(","));
    assert_eq!(lines[1], "rademacher,1,0,1,2.718281828459045,2.718281828459045,5.43656365691809");
}

#[test]
fn compare_ratio_is_two() {
    let out = bin().args(["table", "compare", "--n", "10,100,1000"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), COMPARE_HEADER.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r.rsplit(',').next().unwrap(), "2");
    }
}

#[test]
fn divergent_moment_is_an_error() {
    let out = bin().args(["table", "k", "--dist", "laplace:1", "--delta", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("abs_exp_moment diverges"));
}

#[test]
fn failing_end_expectation_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{"seed": 1, "suites": [{"suite": "end_check", "tables": [
            {"name": "comonotone", "table": {"support_x": [0, 1], "support_y": [0, 1], "joint_probs": [[0.5, 0], [0, 0.5]]}, "expect": 1}
        ]}]}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["run", cfg_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["verdict"], "FAIL");
    assert_eq!(manifest["seed"], 1);
}

#[test]
fn unknown_key_rejected_by_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, r#"{"seed": 1, "suites": [{"suite": "compare", "dists": [{"kind": "rademacher"}], "deltas": [1], "n_grid": [10], "alpha": 1, "epsilonn": 1}]}"#).unwrap();
    let out = bin().args(["run", cfg_path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("epsilonn"));
}

#[test]
fn reference_run_writes_contract_headers() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = reference();
    cfg.output = dir.path().to_path_buf();
    let m = run_experiment(&cfg, RunOptions { workers: 2 }).unwrap();
    assert_eq!(m.suites.len(), cfg.suites.len());
    assert_eq!(m.config_hash, cfg.hash());
    let first_line = |name: &str| {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        text.lines().next().unwrap().to_string()
    };
    assert_eq!(first_line("00_scalar.csv"), SCALAR_HEADER.join(","));
    assert_eq!(first_line("01_k_table.csv"), K_TABLE_HEADER.join(","));
    assert_eq!(first_line("04_theorem1.csv"), THEOREM1_HEADER.join(","));
    assert_eq!(first_line("05_compare.csv"), COMPARE_HEADER.join(","));
    // JSON mirrors the CSV rows
    let rows: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("05_compare.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), m.suites[5].rows);
    assert_eq!(rows[0]["k_ratio"], 2.0);
}

#[test]
fn seeded_verify_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let status = bin()
            .args(["verify", "theorem1", "--family", "iid:10:uniform:-1,1", "--delta", "0.5", "--reps", "5000"])
            .args(["--seed", seed, "--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("00_theorem1.csv")).unwrap()
    };
    assert_eq!(run("7", "a"), run("7", "b"));
}
