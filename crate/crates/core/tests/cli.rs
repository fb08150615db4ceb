use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn permbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn perm_prints_value_first() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(
        dir.path(),
        "a.json",
        r#"{"field":"real","n":2,"rows":[[1,2],[3,4]]}"#,
    );
    let out = permbound(&["perm", &a]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("10"));
    assert!(lines.next().unwrap().starts_with("ln|perm| = 2.302585"));

    let i3 = write(dir.path(), "i3.csv", "1,0,0\n0,1,0\n0,0,1\n");
    let out = permbound(&["perm", &i3]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().next(), Some("1"));
}

#[test]
fn perm_complex() {
    let dir = tempfile::tempdir().unwrap();
    // perm [[i, 1], [1, 1]] = i + 1
    let a = write(
        dir.path(),
        "c.json",
        r#"{"field":"complex","rows":[[[0,1],1],[1,1]]}"#,
    );
    let out = permbound(&["perm", &a]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().next(), Some("1+1i"));
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"field":"real","rows":[[1,2],[3]]}"#,
    );
    let out = permbound(&["perm", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));

    assert_eq!(
        permbound(&["perm", "/nonexistent/file.json"]).status.code(),
        Some(2)
    );
    assert_eq!(permbound(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(permbound(&["estimate", &bad]).status.code(), Some(2));
}

#[test]
fn size_cap_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<String> = (0..31)
        .map(|i| {
            let r: Vec<&str> = (0..31).map(|j| if i == j { "1" } else { "0" }).collect();
            r.join(",")
        })
        .collect();
    let big = write(dir.path(), "big.csv", &rows.join("\n"));
    let out = permbound(&["perm", &big]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_report_extremal_and_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        r#"{"field":"real","n":6,"rows":[[0,1,0,0,0,0],[0,0,-1,0,0,0],[1,0,0,0,0,0],[0,0,0,0,0,-1],[0,0,0,1,0,0],[0,0,0,0,1,0]]}"#,
    );
    let out = permbound(&["bounds", &p]);
    assert_eq!(out.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["best"], "norm");
    assert!(rep["slack"].as_f64().unwrap().abs() < 1e-8);
    let first = &rep["bounds"][0];
    for key in ["name", "log_value", "applicable", "conditions", "params"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }

    let diag: Vec<String> = (0..100)
        .map(|i| {
            let r: Vec<&str> = (0..100)
                .map(|j| if i == j { "0.99" } else { "0" })
                .collect();
            format!("[{}]", r.join(","))
        })
        .collect();
    let d = write(
        dir.path(),
        "d.json",
        &format!(r#"{{"field":"real","n":100,"rows":[{}]}}"#, diag.join(",")),
    );
    let out_path = dir.path().join("rep.json");
    let out = permbound(&["bounds", &d, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rep: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let lp = rep["log_perm_exact"].as_f64().unwrap();
    assert!((lp - 100.0 * 0.99f64.ln()).abs() < 1e-10);
    for b in rep["bounds"].as_array().unwrap() {
        if b["applicable"].as_bool().unwrap() {
            assert!(b["log_value"].as_f64().unwrap() >= lp - 1e-10);
        }
    }

    let out = permbound(&["bounds", &d, "--T", "1"]);
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    let ii = rep["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["name"] == "main_complex_ii")
        .unwrap();
    let expected = std::f64::consts::LN_2 - 100.0 * 0.01f64.powi(2) / 1e5;
    assert!((ii["log_value"].as_f64().unwrap() - expected).abs() < 1e-12);

    assert_eq!(
        permbound(&["bounds", &d, "--T", "0.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn estimate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(
        dir.path(),
        "a.json",
        r#"{"field":"real","n":2,"rows":[[0.5,0.2],[0.1,0.7]]}"#,
    );
    let run = || {
        stdout(&permbound(&[
            "estimate",
            &a,
            "--samples",
            "2000",
            "--seed",
            "9",
        ]))
    };
    let first = run();
    assert_eq!(first, run());
    let rep: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(rep["samples"], 2000);
    assert_eq!(rep["exceeded_tn"], 0);
    let mean = rep["mean"][0].as_f64().unwrap();
    let stderr = rep["stderr"].as_f64().unwrap();
    assert!((mean - 0.37).abs() <= 5.0 * stderr);
}

#[test]
fn experiments_write_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.json", r#"{"matrices": 40, "n_max": 6}"#);
    let v1 = dir.path().join("v1.json");
    let v2 = dir.path().join("v2.json");
    for out in [&v1, &v2] {
        let o = permbound(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&v1).unwrap(), fs::read(&v2).unwrap());
    let rep: Value = serde_json::from_slice(&fs::read(&v1).unwrap()).unwrap();
    assert_eq!(rep["matrices_tested"], 40);
    assert_eq!(rep["violations"].as_array().unwrap().len(), 0);

    let tight = dir.path().join("t.csv");
    let o = permbound(&["tightness", "--out", tight.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&tight).unwrap();
    assert!(text.lines().next().unwrap().starts_with("n,delta,ln_perm"));
    assert!(text.contains("100,0.99,-1.00503358535014"));

    let ccfg = write(
        dir.path(),
        "cc.json",
        r#"{"samples": 3000, "matrices": [{"label": "id", "ensemble": {"kind": "ScaledIdentity", "params": {"field": "complex", "delta": 1.0}}, "n": 10, "seed": 1, "thresholds": [0.1]}]}"#,
    );
    let conc = dir.path().join("c.csv");
    let o = permbound(&[
        "concentration",
        "--config",
        &ccfg,
        "--out",
        conc.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&conc).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(dir.path().join("c.json").exists());

    let bad = write(dir.path(), "bad.json", r#"{"nonsense": 1}"#);
    assert_eq!(
        permbound(&["verify", "--config", &bad]).status.code(),
        Some(2)
    );
}

#[test]
fn failing_assertion_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // a negative tolerance turns every equality case into a violation
    let cfg = write(
        dir.path(),
        "v.json",
        r#"{"matrices": 4, "n_max": 4, "tol_per_n": -1.0, "ensembles": [{"kind": "ExtremalP"}]}"#,
    );
    let o = permbound(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("assertion failed"));
}
