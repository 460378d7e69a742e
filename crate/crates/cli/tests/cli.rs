//! End-to-end checks of the binary: exit codes, output schemas, seeding.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deficitlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("deficitlab_cli_{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("usage"), "stderr: {err}");
}

#[test]
fn eval_builtin_gaussian_csv_row() {
    let out = run(&["eval", "--density", "std-gaussian-1d", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "density,h,N,J,D,I,dLSI,p");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "std-gaussian-1d");
    assert_eq!(row[2], "1"); // N
    assert_eq!(row[3], "1"); // J
    assert_eq!(row[4], "0"); // D
}

#[test]
fn eval_density_file_round_trip() {
    let dir = tmp_dir("evalfile");
    let path = dir.join("density.json");
    std::fs::write(
        &path,
        r#"{"kind":"mixture","dim":1,"components":[{"weight":1.0,"mean":[0.0],"cov":[[4.0]]}]}"#,
    )
    .unwrap();
    let out = run(&["eval", "--density", path.to_str().unwrap(), "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let n: f64 = row[2].parse().unwrap();
    assert!((n - 4.0).abs() < 1e-12); // entropy power of N(0,4)
}

#[test]
fn check_grid_produces_expected_row_count() {
    let out = run(&["check", "--ineq", "interpolation", "--theta-grid", "0:1:0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12, "header + 11 theta rows");
    assert!(text.starts_with("name,theta,lambda,lhs,rhs,deficit,err,verdict"));
}

#[test]
fn check_rejects_unknown_inequality() {
    let out = run(&["check", "--ineq", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_invalid_config_exits_2() {
    let dir = tmp_dir("badcfg");
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version":1,"master_seed":1,"output_dir":"out","suites":[
            {"kind":"gaussian_closed_form","count":4,"max_dim":2,"tolerance":-1.0}]}"#,
    )
    .unwrap();
    let out = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerance"));
}

#[test]
fn run_small_config_and_merge_report() {
    let dir = tmp_dir("runsmall");
    let out_dir = dir.join("artifacts");
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"schema_version":1,"master_seed":7,"output_dir":"{}","suites":[
                {{"kind":"gaussian_closed_form","count":6,"max_dim":3,"tolerance":1e-10}},
                {{"kind":"ineq","ineq":"epi","gaussian_pairs":2,"mixture_pairs":0,
                  "theta_grid":[0.0,0.5,1.0],"tolerance":1e-10}}]}}"#,
            out_dir.display()
        ),
    )
    .unwrap();
    let out = run(&["run", "--config", cfg.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("summary.json").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["exit_code"], 0);

    let ineq_csv = out_dir.join("suite_1_ineq.csv");
    assert!(ineq_csv.exists());
    let merged = run(&["report", ineq_csv.to_str().unwrap()]);
    assert_eq!(merged.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&String::from_utf8(merged.stdout).unwrap()).unwrap();
    assert_eq!(doc["rows"], 6);
    assert_eq!(doc["violated"], 0);
}

#[test]
fn seed_env_and_flag_precedence() {
    // same flag seed → identical output; env var respected when flag absent
    let a = run(&["check", "--ineq", "epi", "--theta-grid", "0:1:0.5", "--seed", "5"]);
    let b = run(&["check", "--ineq", "epi", "--theta-grid", "0:1:0.5", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
    let c = bin()
        .args(["check", "--ineq", "epi", "--theta-grid", "0:1:0.5"])
        .env("DEFICITLAB_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn clt_subcommand_emits_csv_and_chart() {
    let dir = tmp_dir("clt");
    let out = run(&[
        "clt",
        "--base",
        "two-point-mixture",
        "--n-max",
        "6",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("suite_0_clt.csv")).unwrap();
    assert!(csv.starts_with("n,D,I,dLSI,entCLT_deficit,fiCLT_deficit,doubling_deficit"));
    assert_eq!(csv.lines().count(), 7);
    let svg = std::fs::read_to_string(dir.join("suite_0_clt.svg")).unwrap();
    assert!(svg.contains("<polyline"));
}

#[test]
fn hyper_subcommand_emits_expected_columns() {
    let dir = tmp_dir("hyper");
    let out = run(&["hyper", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("suite_0_hyper.csv")).unwrap();
    assert!(csv.starts_with("p,q,t,theta,lhs_norm,rhs_norm,deficit,deriv_lhs,deriv_rhs"));
}

#[test]
fn geom_writes_counterexample_records() {
    let dir = tmp_dir("geom");
    let out = run(&[
        "geom",
        "--dim",
        "2",
        "--pairs",
        "32",
        "--points",
        "8",
        "--seed",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("suite_0_geom.csv")).unwrap();
    assert!(csv.starts_with("seedA,seedB,dim,conj1_deficit,conj2_deficit"));
    assert_eq!(csv.lines().count(), 33);
    assert!(dir.join("counterexamples").join("conj1_worst_dim2.json").exists());
}
