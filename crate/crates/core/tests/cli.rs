//! End-to-end runs of the `rsf` binary.

use std::process::{Command, Output};

fn rsf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsf")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn curvature_prints_json() {
    let o = rsf(&["curvature", "1,1,1,5"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["r_i", "r_j", "r_k", "r_h"] {
        assert!((v[k].as_f64().unwrap() - 2.16).abs() < 1e-14);
    }
    assert!((v["S"].as_f64().unwrap() - 15.12).abs() < 1e-13);
    assert_eq!(v["vol"].as_f64().unwrap(), 625.0);
    let o = rsf(&["curvature", "1,1,1,1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["S"].as_f64().unwrap(), 42.0);
}

#[test]
fn bad_input_exits_nonzero_with_message() {
    let o = rsf(&["curvature", "1,1,1,-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
    let o = rsf(&["curvature", "1,x,1,1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at 'x'"));
    let o = rsf(&["--n", "0", "curvature", "1,1,1,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flow_summaries() {
    let o = rsf(&["flow", "0.1,1,1,3", "--backward"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("BackwardCollapse(ratio_limit=0.5)"));
    assert!(stdout(&o).starts_with("t,x,y,z,s,S,"));
    let o = rsf(&["flow", "1,1,1,1"]);
    assert!(stderr(&o).contains("terminal: ConvergedRound"));
    let o = rsf(&["flow", "slice:0.3,0.3,0.3"]);
    assert!(stderr(&o).contains("terminal: ForwardBlowup"));
    let o = rsf(&["flow", "slice:0.7,1,1.2", "--flow", "unnormalized", "--t-horizon", "0.01", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["flow"], "Unnormalized");
    assert!(stderr(&o).contains("HorizonReached"));
}

#[test]
fn flow_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert!(rsf(&["flow", "0.5,0.8,1.2,1", "--backward", "--out", p.to_str().unwrap()]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn separatrix_command() {
    let o = rsf(&["separatrix", "0.3,0.3,0.3", "1.1,1.1,1.1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["bracket_width"].as_f64().unwrap() <= 1e-10);
    assert!((v["point"][0].as_f64().unwrap() - 5f64.powf(-4.0 / 7.0)).abs() < 1e-8);
    let o = rsf(&["separatrix", "0.3,0.3,0.3", "0.35,0.35,0.35"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("ForwardBlowup"));
}

#[test]
fn classify_command() {
    let o = rsf(&["classify", "0.1,1,1,3", "--numerical"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"]["ancient"], true);
    assert_eq!(v["numerical"]["verdict_match"], true);
    let o = rsf(&["classify", "0.5,2,2,1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"]["reason"], "ZGreaterThanS");
}

#[test]
fn verify_passes_and_is_seeded() {
    let a = rsf(&["verify", "--n", "3", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let b = rsf(&["verify", "--n", "3", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 2\nformat = \"json\"\n[integrator]\nt_horizon = 0.01\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = rsf(&["--config", c, "flow", "slice:0.7,1,1.2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n"], 2);
    assert!(stderr(&o).contains("HorizonReached"));
    let o = rsf(&["--config", c, "--format", "csv", "--n", "1", "flow", "slice:0.7,1,1.2"]);
    assert!(stdout(&o).starts_with("t,"));
    std::fs::write(&cfg, "nn = 2\n").unwrap();
    assert_eq!(rsf(&["--config", c, "curvature", "1,1,1,1"]).status.code(), Some(2));
}

#[test]
fn portrait_thread_cap() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_rsf"))
            .args(["portrait", "--axis", "s:0.5:4:3", "--axis", "ys:0.5:1.5:3"])
            .env("RSF_THREADS", threads)
            .output()
            .unwrap()
    };
    let (one, auto) = (run("1"), run("0"));
    assert!(one.status.success());
    assert_eq!(one.stdout, auto.stdout);
    assert_eq!(stdout(&one).lines().count(), 10);
    assert_eq!(run("many").status.code(), Some(2));
}
