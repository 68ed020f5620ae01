//! The binary's contract: output shapes, exit codes, determinism, env override.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bp2split"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).env_remove("BP2SPLIT_OUT_DIR").output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

const SMALL: &[&str] = &[
    "verify-splitting", "--max-degree", "40", "--k-max", "6", "--s-max", "2", "--m-max", "3", "--w-max", "1",
];

#[test]
fn basis_row_counts() {
    let (code, out, err) = run(&["basis", "--p", "3", "--i", "1", "--max-degree", "17", "--format", "tsv"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1 + 7);
    assert!(out.contains("tau2\t17\t9\t1"));
    assert!(err.contains("p >= 5"));
    let (_, out, _) = run(&["basis", "--p", "3", "--i", "2", "--max-degree", "0", "--format", "tsv"]);
    assert_eq!(out.lines().skip(1).collect::<Vec<_>>(), vec!["1\t0\t0\t0"]);
}

#[test]
fn bad_prime_is_a_config_error() {
    for p in ["4", "2", "9"] {
        let (code, _, err) = run(&["basis", "--p", p]);
        assert_eq!(code, 2);
        assert!(err.contains("p must be an odd prime"), "{err}");
    }
}

#[test]
fn theta_json() {
    let (code, out, _) = run(&["theta", "--p", "3", "--k", "9", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let m = v["matrix"].as_array().unwrap();
    assert_eq!(m.len(), 6);
    assert!(v["report"]["bijective"].as_bool().unwrap());
    let (_, out, _) = run(&["theta", "--p", "3", "--k", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["target"], serde_json::json!(["xi1"]));
}

#[test]
fn paper_preset_uses_five_and_is_quiet() {
    let (code, out, err) = run(&["theta", "--preset", "paper", "--k", "0", "--format", "json"]);
    assert_eq!(code, 0);
    assert!(err.is_empty());
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["prime"], 5);
    assert_eq!(v["matrix"], serde_json::json!([[1]]));
}

#[test]
fn degenerate_run_passes() {
    let (code, out, _) = run(&["verify-splitting", "--max-degree", "0", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["schema"], "bp2split-report/1");
}

#[test]
fn small_run_is_deterministic() {
    let mut a: Vec<&str> = SMALL.to_vec();
    a.extend(["--format", "json"]);
    let (c1, o1, _) = run(&a);
    let (c2, o2, _) = run(&a);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(o1, o2);
}

#[test]
fn injected_fault_fails_with_code_one() {
    let mut a: Vec<&str> = SMALL.iter().map(|x| if *x == "40" { "60" } else { x }).collect();
    a.extend(["--inject-fault", "--format", "json"]);
    let (code, out, _) = run(&a);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], false);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec!["bp2-assembly"]);
}

#[test]
fn out_dir_from_environment() {
    let dir = std::env::temp_dir().join(format!("bp2split-cli-{}", std::process::id()));
    let out = bin()
        .args(["basis", "--max-degree", "8", "--format", "tsv"])
        .env("BP2SPLIT_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let body = std::fs::read_to_string(dir.join("basis.tsv")).unwrap();
    assert!(body.starts_with("monomial\tdegree"));
    std::fs::remove_dir_all(&dir).unwrap();
}
