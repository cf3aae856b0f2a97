use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geomvertex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all);
    let doc = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    });
    (out.status.code().unwrap(), doc)
}

fn degree0(doc: &Value) -> (f64, f64) {
    let entry = &doc["results"]["value"]["0"][0];
    assert_eq!(entry[0], "vac");
    (entry[1][0].as_f64().unwrap(), entry[1][1].as_f64().unwrap())
}

#[test]
fn trivial_axioms_pass() {
    let (code, doc) = run_json(&["axioms", "--model", "trivial"]);
    assert_eq!(code, 0);
    assert_eq!(doc["schema"], 1);
    for (name, c) in doc["checks"].as_object().unwrap() {
        assert_eq!(c["status"], "pass", "{name}");
    }
}

#[test]
fn free_boson_axioms_record_generator_order() {
    let (code, doc) = run_json(&[
        "axioms",
        "--model",
        "free_boson",
        "--window",
        "0:6",
        "--kmax",
        "7",
    ]);
    assert_eq!(code, 0, "{doc:#}");
    let gen = &doc["checks"]["va.locality"]["certificate"]["generator"];
    assert_eq!(gen["pair"], "b,b");
    assert_eq!(gen["order"], 2);
}

#[test]
fn small_cap_is_undetermined() {
    let (code, doc) = run_json(&[
        "axioms",
        "--model",
        "free_boson",
        "--window",
        "0:2",
        "--kmax",
        "1",
    ]);
    assert_eq!(code, 3);
    assert_eq!(doc["checks"]["va.locality"]["status"], "undetermined");
}

#[test]
fn eval_two_bosons_both_orders() {
    let (code, doc) = run_json(&["eval", "b@2", "b@1"]);
    assert_eq!(code, 0);
    assert_eq!(doc["results"]["path"], "ordered");
    let (re, im) = degree0(&doc);
    assert!((re - 1.0).abs() < 1e-9 && im.abs() < 1e-9);

    let (code, doc) = run_json(&["eval", "b@1", "b@2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["results"]["path"], "continued");
    let (re, im) = degree0(&doc);
    assert!((re - 1.0).abs() < 1e-9 && im.abs() < 1e-9);
}

#[test]
fn eval_without_insertions_is_vacuum() {
    let (code, doc) = run_json(&["eval"]);
    assert_eq!(code, 0);
    assert_eq!(degree0(&doc), (1.0, 0.0));
    for l in 1..=6 {
        assert!(doc["results"]["value"][l.to_string()]
            .as_array()
            .unwrap()
            .is_empty());
    }
}

#[test]
fn coincident_points_exit_4() {
    let out = run(&["eval", "b@1", "b@1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diagonal"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["axioms", "--window", "6:0"],
        vec!["axioms", "--model", "fermion"],
        vec!["eval", "b@1,2,3"],
        vec!["frobnicate"],
        vec!["converge", "--k-values", ""],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn roundtrip_all_models() {
    for m in ["trivial", "commutative", "free_boson"] {
        let (code, doc) = run_json(&["roundtrip", "--model", m]);
        assert_eq!(code, 0, "{m}: {doc:#}");
        assert_eq!(doc["checks"]["roundtrip.exact"]["residual"], 0.0);
    }
    let (_, doc) = run_json(&["roundtrip", "--model", "trivial"]);
    for (name, c) in doc["checks"].as_object().unwrap() {
        if let Some(r) = c["residual"].as_f64() {
            assert!(r < 1e-15, "{name}: {r}");
        }
    }
}

#[test]
fn converge_columns() {
    let (code, doc) = run_json(&["converge", "--model", "free_boson"]);
    assert_eq!(code, 0);
    for check in ["converge.associativity", "converge.ope"] {
        assert_eq!(
            doc["checks"][check]["certificate"]["strictly_decreasing"], true,
            "{check}"
        );
    }
    let (code, doc) = run_json(&["converge", "--model", "trivial"]);
    assert_eq!(code, 0);
    for check in ["converge.associativity", "converge.ope"] {
        assert_eq!(
            doc["checks"][check]["certificate"]["identically_zero"], true,
            "{check}"
        );
    }
}

#[test]
fn reports_are_deterministic() {
    let a = run(&["eval", "b@1,0.5", "b(-2)@-0.3", "--json"]);
    let b = run(&["eval", "b@1,0.5", "b(-2)@-0.3", "--json"]);
    assert_eq!(a.stdout, b.stdout);
    let (_, doc) = run_json(&["eval", "b@2", "b@1"]);
    assert!(doc["checks"]["evaluation"]["timing"].is_null());
    let (_, doc) = run_json(&["eval", "b@2", "b@1", "--timing"]);
    assert!(doc["checks"]["evaluation"]["timing"].is_f64());
}

#[test]
fn config_file_and_output_path() {
    let dir = std::env::temp_dir().join(format!("geomvertex-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    let out = dir.join("report.json");
    std::fs::write(&cfg, r#"{"model": "trivial", "window": "0:3", "kmax": 2}"#).unwrap();
    let status = run(&[
        "locality",
        "--config",
        cfg.to_str().unwrap(),
        "--model",
        "commutative",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["config"]["model"], "commutative");
    assert_eq!(doc["config"]["window"], serde_json::json!([0, 3]));
    assert_eq!(doc["config"]["kmax"], 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ope_outside_domain_exit_4() {
    let out = run(&["ope", "b@0", "b@1", "b@0.5"]);
    assert_eq!(out.status.code(), Some(4));
}
