//! End-to-end checks of the command-line surface: exit codes, file
//! formats, config echoes and reproducibility from the echo.

use noncolliding::cli::{echo_from_csv, main_with_args, run_check, run_trajectory};
use noncolliding::config::parse_config;
use std::path::PathBuf;

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("noncolliding-test-{}-{name}", std::process::id()));
    p
}

fn write_tmp(name: &str, content: &str) -> PathBuf {
    let p = tmp(name);
    std::fs::write(&p, content).unwrap();
    p
}

const DYSON: &str = "\
system = dyson
gamma = 1.0
p = 3
x0 = equispaced(-1, 1)
T = 0.05
dt = 1e-3
seed = 5
sample_every = 10
";

#[test]
fn run_subcommand_writes_reproducible_csv() {
    let cfg_path = write_tmp("run.conf", DYSON);
    let out_a = tmp("a.csv");
    let out_b = tmp("b.csv");
    for out in [&out_a, &out_b] {
        let code = main_with_args(&[
            "run".into(),
            "--config".into(),
            cfg_path.to_str().unwrap().into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]);
        assert_eq!(code, 0);
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "same config + seed must give identical bytes");

    // the embedded echo reproduces the file
    let csv = String::from_utf8(a).unwrap();
    let echo = echo_from_csv(&csv);
    let cfg = parse_config(&echo).unwrap();
    assert_eq!(run_trajectory(&cfg).unwrap(), csv);

    for p in [cfg_path, out_a, out_b] {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn seed_override_changes_output() {
    let cfg = parse_config(DYSON).unwrap();
    let csv_a = run_trajectory(&cfg).unwrap();
    let mut cfg2 = cfg.clone();
    cfg2.seed = 6;
    let csv_b = run_trajectory(&cfg2).unwrap();
    assert_ne!(csv_a, csv_b);
}

#[test]
fn ensemble_subcommand_writes_json_with_echo() {
    let text = format!("{DYSON}n_paths = 4\nworkers = 2\n");
    let cfg_path = write_tmp("ens.conf", &text);
    let out = tmp("ens.json");
    let code = main_with_args(&[
        "ensemble".into(),
        "--config".into(),
        cfg_path.to_str().unwrap().into(),
        "--out".into(),
        out.to_str().unwrap().into(),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["n_paths"].as_u64(), Some(4));
    assert!(v["times"].is_array());
    assert!(v["r_sq"]["mean"].is_array());
    assert!(parse_config(v["config"].as_str().unwrap()).is_ok());
    let _ = std::fs::remove_file(cfg_path);
    let _ = std::fs::remove_file(out);
}

#[test]
fn check_exit_codes_through_cli() {
    // pass, fail, unknown
    for (cfg, expected) in [
        (DYSON.to_string(), 0),
        (DYSON.replace("gamma = 1.0", "gamma = 0.4"), 1),
        (
            "system = nearest_neighbor\ngamma = 5\np = 5\nx0 = zero\nT = 1\ndt = 1e-3\n"
                .to_string(),
            2,
        ),
    ] {
        let path = write_tmp(&format!("check-{expected}.conf"), &cfg);
        let code = main_with_args(&[
            "check".into(),
            "--config".into(),
            path.to_str().unwrap().into(),
        ]);
        assert_eq!(code, expected, "for config:\n{cfg}");
        let _ = std::fs::remove_file(path);
    }
}

#[test]
fn check_json_contains_witnesses() {
    let cfg = parse_config(&DYSON.replace("gamma = 1.0", "gamma = 0.4")).unwrap();
    let (json, code) = run_check(&cfg).unwrap();
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["report"]["verdicts"]["A2"], "fail");
    let w = &v["report"]["witnesses"][0];
    assert_eq!(w["condition"], "A2");
    assert!(w["lhs"].as_f64().unwrap() > w["rhs"].as_f64().unwrap());
}

#[test]
fn invalid_config_lists_every_problem() {
    let path = write_tmp(
        "bad.conf",
        "system = dyson\ngamma = x\np = 3\nx0 = zero\nT = 1\ndt = 1e-3\nwhat = 1\n",
    );
    let code = main_with_args(&[
        "run".into(),
        "--config".into(),
        path.to_str().unwrap().into(),
    ]);
    assert_eq!(code, 2);
    let _ = std::fs::remove_file(path);
}

#[test]
fn zero_paths_is_a_config_error() {
    let text = format!("{DYSON}n_paths = 0\n");
    assert!(parse_config(&text).is_err());
}
