use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use drscale::io::{Aspect, LawDocument};
use drscale::numeric::log_space;
use drscale::{JointLaw, PowerLaw};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("drscale-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drscale")).current_dir(dir).args(args).output().unwrap()
}

#[test]
fn fit_recovers_a_data_law() {
    let dir = scratch("fit");
    let law = PowerLaw::new(4.34e3, 0.83, 0.08).unwrap();
    let mut csv = String::from("strategy,model_size,data_size,ce_effectiveness,ce_ood,ce_adversarial\n");
    for d in log_space(3e4, 4.8e5, 5) {
        let d = d.round();
        csv.push_str(&format!("standard,110000000,{d},1.0,{},\n", law.predict(d)));
    }
    std::fs::write(dir.join("runs.csv"), csv).unwrap();
    let out = run(&dir, &["fit", "--input", "runs.csv", "--variable", "data", "--aspect", "ood"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (doc, _) = LawDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    let got = doc.power_law().unwrap();
    assert!((got.scale() - 4.34e3).abs() / 4.34e3 < 0.01);
    assert!((got.exponent() - 0.83).abs() / 0.83 < 0.01);
    assert!((got.offset() - 0.08).abs() / 0.08 < 0.01);
}

fn write_laws(dir: &Path) {
    let rob = JointLaw::new(1.96e4, 2.57e3, 0.25, 0.80, 0.02).unwrap();
    let eff = JointLaw::new(8.34e5, 2.17e3, 0.57, 1.38, 0.03).unwrap();
    LawDocument::from_joint_law(&rob, Aspect::Robustness, None, "pareto").save(&dir.join("rob.json")).unwrap();
    LawDocument::from_joint_law(&eff, Aspect::Effectiveness, None, "pareto").save(&dir.join("eff.json")).unwrap();
}

#[test]
fn budget_stays_within_the_cap() {
    let dir = scratch("budget");
    write_laws(&dir);
    let out = run(&dir, &["budget", "--robustness-law", "rob.json", "--effectiveness-law", "eff.json", "--budget", "5000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["cost"].as_f64().unwrap() <= 5000.0);
    assert!(v["model_size"].as_f64().unwrap() >= 1.0);
}

#[test]
fn infeasible_budget_is_a_domain_error() {
    let dir = scratch("infeasible");
    write_laws(&dir);
    let out = run(&dir, &["budget", "--robustness-law", "rob.json", "--effectiveness-law", "eff.json", "--budget", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = scratch("usage");
    assert_eq!(run(&dir, &["simulate"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["fit", "--input", "x.csv", "--variable", "size", "--aspect", "ood"]).status.code(), Some(2));
}

#[test]
fn missing_input_is_reported() {
    let dir = scratch("missing");
    let out = run(&dir, &["frontier", "--input", "absent.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_is_reproducible() {
    let dir = scratch("simulate");
    let args = ["simulate", "--seed", "7", "--train-pairs", "1000", "--steps", "200"];
    let a = run(&dir, &args);
    let b = run(&dir, &args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["strategy"], "standard");
}
