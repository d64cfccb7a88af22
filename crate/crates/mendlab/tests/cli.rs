use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mendlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mendlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn gen(dir: &Path, family: &str, params: &str) -> Output {
    let out = mendlab(&["gen", "--family", family, "--params", params, "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn spec_commands() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "ri", "i=2,height=4");
    let spec = p(dir.path(), "problem.json");

    let out = mendlab(&["classify", "--spec", &spec]);
    assert!(stdout(&out).starts_with("Exponential"), "{}", stdout(&out));
    let out = mendlab(&["bounds", "--spec", &spec, "--dmax", "4"]);
    assert_eq!(stdout(&out).trim(), "lower=31 upper=31");
    let out = mendlab(&["oracle-dp", "--spec", &spec, "--height", "4", "--search"]);
    assert_eq!(stdout(&out), "volume=31\nsearch=31\n");
}

#[test]
fn verify_and_mend() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "ri", "i=2,height=3");
    let (prob, graph, lab) = (p(dir.path(), "problem.json"), p(dir.path(), "graph.json"), p(dir.path(), "labeling.json"));
    let inst = ["--problem", prob.as_str(), "--graph", graph.as_str(), "--labeling", lab.as_str()];

    let partial = mendlab(&[&["verify"][..], &inst, &["--partial"]].concat());
    assert_eq!((partial.status.code(), stdout(&partial).trim()), (Some(0), "accepted"));

    let mend = mendlab(&[&["mend"][..], &inst, &["--hole", "0", "--policy", "random-child", "--trials", "3"]].concat());
    assert_eq!(mend.status.code(), Some(0));
    let runs: serde_json::Value = serde_json::from_str(&stdout(&mend)).unwrap();
    let sizes: Vec<usize> = runs.as_array().unwrap().iter().map(|r| r["diff"].as_array().unwrap().len()).collect();
    assert_eq!(sizes, [15, 15, 15]);

    let starved = mendlab(&[&["mend"][..], &inst, &["--hole", "0", "--policy", "oracle", "--budget", "5"]].concat());
    assert_eq!(starved.status.code(), Some(3));
}

#[test]
fn path_to_sink_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = gen(dir.path(), "layered", "height=3,j0=5");
    assert!(stdout(&out).contains("sink="));
    let (graph, lab) = (p(dir.path(), "graph.json"), p(dir.path(), "labeling.json"));

    let alg1 = mendlab(&["alg1", "--graph", &graph, "--labeling", &lab, "--hole", "0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&alg1)).unwrap();
    assert_eq!(v["relabels"], 4);

    let (enc, dec) = (p(dir.path(), "enc.json"), p(dir.path(), "dec.json"));
    let e = mendlab(&["encode", "--graph", &graph, "--out-graph", &enc]);
    assert_eq!(e.status.code(), Some(0));
    let d = mendlab(&["decode", "--graph", &enc, "--out-graph", &dec]);
    assert!(stdout(&d).contains("decoded_n=15"), "{}", stdout(&d));
}

#[test]
fn experiment_fit_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = p(dir.path(), "cfg.json");
    fs::write(
        &cfg,
        r#"{"name": "r2", "family": {"kind": "propagation", "spec": {"labels": ["red"], "l0": "red",
            "wildcard": "white", "mu": [[2]], "delta": 3}}, "measures": ["exists_mvol"], "sizes": [2, 3, 4, 5, 6, 7]}"#,
    )
    .unwrap();
    let csv = p(dir.path(), "out.csv");
    let ex = mendlab(&["experiment", "--config", &cfg, "--out", &csv]);
    assert_eq!(ex.status.code(), Some(0), "{}", String::from_utf8_lossy(&ex.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("family,params,n,measure,value,stderr,seed\n"));

    let fit = mendlab(&["fit", "--in", &csv, "--model", "power", "--target", "0.631"]);
    assert_eq!(fit.status.code(), Some(0), "{}", stdout(&fit));
    let far = mendlab(&["fit", "--in", &csv, "--model", "power", "--target", "0.9"]);
    assert_eq!(far.status.code(), Some(1));

    let gap = mendlab(&["report", "--gap", "--config", &cfg]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&gap)).unwrap();
    assert!(v["verdict"].is_string());
}

#[test]
fn sinksearch_and_usage_errors() {
    let s = mendlab(&["sinksearch", "--height", "6", "--j0", "17"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&s)).unwrap();
    assert_eq!(v["sink"], 17);
    assert_eq!(mendlab(&["sinksearch"]).status.code(), Some(2));
    assert_eq!(mendlab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(mendlab(&["classify", "--spec", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(mendlab(&["--version"]).status.code(), Some(0));
}
