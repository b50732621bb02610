use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stochlie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stochlie")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = stochlie(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    });
    (out.status.code().unwrap(), v)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn basis_rejects_small_n() {
    for n in ["1", "0", "-3"] {
        let out = stochlie(&["basis", "--n", n]);
        assert_eq!(out.status.code(), Some(2));
        assert!(stderr(&out).contains("n must be ≥ 2"), "{}", stderr(&out));
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(stochlie(&["basis"]).status.code(), Some(2));
    assert_eq!(stochlie(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(stochlie(&["basis", "--n", "3", "--tol-abs", "-1"]).status.code(), Some(2));
}

#[test]
fn basis_json_and_text() {
    let (code, v) = json(&["basis", "--n", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["dimension"], 12);
    assert_eq!(v["basis"]["elements"].as_array().unwrap().len(), 12);
    assert!(v["failure"].is_null());
    let text = String::from_utf8(stochlie(&["basis", "--n", "4"]).stdout).unwrap();
    assert!(text.contains("basis Gram deviation"));
}

#[test]
fn classify_reports_type_a() {
    let (code, v) = json(&["classify", "--n", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["detected_type"], "A_3");
    assert_eq!(v["root_system"]["cartan_matrix"], serde_json::json!([[2, -1, 0], [-1, 2, -1], [0, -1, 2]]));
    let text = String::from_utf8(stochlie(&["classify", "--n", "5"]).stdout).unwrap();
    assert!(text.contains("o————o————o"));

    let out = stochlie(&["classify", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("trivial Levi factor"));
}

#[test]
fn generators_schema_is_stable_across_n() {
    let keys = ["n", "gamma", "epsilon_choices", "dims_per_round", "final_dim", "stage_checks"];
    let mut shapes = Vec::new();
    for n in 2..=5 {
        let (code, v) = json(&["generators", "--n", &n.to_string()]);
        assert_eq!(code, 0, "n={n}");
        for k in keys {
            assert!(v.get(k).is_some(), "n={n} missing {k}");
        }
        assert_eq!(v["final_dim"], n * (n - 1));
        let mut names: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        names.sort();
        shapes.push(names);
    }
    assert!(shapes.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn levi_and_report_pass() {
    let (code, v) = json(&["levi", "--n", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["certificate"]["derived_series_lengths"], serde_json::json!([4, 3, 0]));
    let (code, v) = json(&["report", "--n", "3", "--seed", "7"]);
    assert_eq!(code, 0);
    for k in ["basis", "multiplication_table", "classify", "levi", "generators"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    assert_eq!(v["passes"], true);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("basis.json");
    let out = stochlie(&["basis", "--n", "3", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["report"]["n"], 3);
}

#[test]
fn markov_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.csv", "0.9,0.1\n0.2,0.8\n");
    let bad = write(dir.path(), "bad.csv", "0.5,0.5\n-0.1,1.1\n");
    let broken = write(dir.path(), "broken.csv", "0.5,0.5\n0.2,oops\n");

    let (code, v) = json(&["markov", "check", &good]);
    assert_eq!(code, 0);
    assert_eq!(v["class"], "S_plus");

    let out = stochlie(&["markov", "check", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nonnegativity"));

    let out = stochlie(&["markov", "check", &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2, column 2"), "{}", stderr(&out));

    assert_eq!(stochlie(&["markov", "check", "/nonexistent.csv"]).status.code(), Some(2));
}

#[test]
fn markov_flow_and_semigroup() {
    let dir = tempfile::tempdir().unwrap();
    let cone = write(dir.path(), "a.csv", "-1,1\n2,-2\n");
    let (code, v) = json(&["markov", "flow", &cone, "--t", "0.1,1,10"]);
    assert_eq!(code, 0);
    assert_eq!(v["points"].as_array().unwrap().len(), 3);

    let not_cone = write(dir.path(), "b.csv", "-1,1\n-2,2\n");
    assert_eq!(stochlie(&["markov", "flow", &not_cone, "--t", "1"]).status.code(), Some(2));

    let family = write(
        dir.path(),
        "fam.json",
        r#"{"times": [0, 1, 2], "entries": [
            {"s": 0, "t": 1, "matrix": [[0.9, 0.1], [0.2, 0.8]]},
            {"s": 1, "t": 2, "matrix": [[0.9, 0.1], [0.2, 0.8]]},
            {"s": 0, "t": 2, "matrix": [[0.83, 0.17], [0.34, 0.66]]}]}"#,
    );
    let (code, v) = json(&["markov", "semigroup", &family]);
    assert_eq!(code, 0);
    assert_eq!(v["order"], "both");

    let broken = write(dir.path(), "fam2.json", r#"{"times": [0, 1], "entries": [{"s": 0, "t": 1, "matrix": [[1, 0], [0, 1]]},]}"#);
    let out = stochlie(&["markov", "semigroup", &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1"));
}

#[test]
fn markov_simulate_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.csv", "0.1,0.6,0.3\n0.3,0.3,0.4\n0.5,0.25,0.25\n");
    let args = ["markov", "simulate", &p, "--steps", "3", "--paths", "2000", "--seed", "11"];
    let (code, a) = json(&args);
    let (_, b) = json(&args);
    assert_eq!(code, 0);
    assert_eq!(a, b);
    assert_eq!(a["laws"].as_array().unwrap().len(), 4);
    let (_, c) = json(&["markov", "simulate", &p, "--steps", "3", "--paths", "2000", "--seed", "12"]);
    assert_ne!(a["counts"], c["counts"]);
    let (code, _) = json(&["markov", "simulate", &p, "--initial", "1,0,0"]);
    assert_eq!(code, 0);
    assert_eq!(stochlie(&["markov", "simulate", &p, "--initial", "1,1,0"]).status.code(), Some(2));
}
