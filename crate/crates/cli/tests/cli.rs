use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spirallab")).args(args).env_remove("SPIRALLAB_THREADS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn is_complex(v: &Value) -> bool {
    v.as_array().is_some_and(|a| a.len() == 2 && a.iter().all(Value::is_number))
}

#[test]
fn covering_koebe_example() {
    let out = run(&["covering", "--fn", "koebe", "--x0", "0,0", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], "spirallab/1");
    assert_eq!(r["subcommand"], "covering");
    assert_eq!(r["pass"], true);
    assert!((r["predicted"].as_f64().unwrap() - 0.125).abs() < 1e-15);
    let case = &r["result"]["cases"][0];
    assert!(is_complex(&case["center"]) && is_complex(&case["x0"]));
    assert!(r["timing"]["elapsed_ms"].is_number());
}

#[test]
fn sharp_bound_example() {
    let out = run(&["sharp-bound", "--lambda", "1,1", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!((r["infimum"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn extend_quarter_bound_example() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q025.json");
    std::fs::write(&q, r#"{"degree":2,"terms":[{"exps":[2],"coef":[0.25,0]}]}"#).unwrap();
    let out = run(&["extend", "--fn", "koebe", "--r", "2", "--Q", q.to_str().unwrap(), "--lambda", "1,0", "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = json(&out);
    let est = r["result"]["invariance"]["details"]["q_sup_estimate"]["value"].as_f64().unwrap();
    assert!((est - 0.25).abs() < 1e-12);
}

#[test]
fn verified_failure_exits_one_with_witness() {
    let q = r#"{"degree":2,"terms":[{"exps":[2],"coef":[0.5,0]}]}"#;
    let out = run(&["extend", "--fn", "koebe", "--r", "2", "--Q", q, "--samples", "1000", "--identities", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["pass"], false);
    assert!(!r["witnesses"].as_array().unwrap().is_empty() || r["inconclusive"] == true);

    let out = run(&["spiral-check", "--gen", r#"{"family":"polynomial","coefs":[[0,0],[-1,0]]}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert!((json(&out)["margin"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn usage_and_input_errors_exit_two() {
    for args in [
        vec!["covering"],
        vec!["covering", "--fn", "nope"],
        vec!["covering", "--fn", r#"{"family":"koebe","extra":1}"#],
        vec!["covering", "--fn", r#"{"family":"mobius_spiral","c":[1.5,0]}"#],
        vec!["covering", "--fn", "koebe", "--alpha", "1.5"],
        vec!["covering", "--fn", "koebe", "--x0", "2,0"],
        vec!["covering", "--fn", "koebe", "--grid", "0,10"],
        vec!["sharp-bound", "--lambda", "-1,1", "--r", "1"],
        vec!["flow", "--gen", "logistic", "--z0", "0.5", "--t", "-1"],
        vec!["gen-extend", "--gen", "logistic", "--r", "2", "--Q", r#"{"degree":2,"terms":[{"exps":[2],"coef":[0.9,0]}]}"#],
        vec!["extend", "--fn", "koebe", "--r", "2", "--Q", r#"{"degree":3,"terms":[{"exps":[3],"coef":[0.1,0]}]}"#],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        assert!(!out.stderr.is_empty());
    }
    let bad = Command::new(env!("CARGO_BIN_EXE_spirallab"))
        .args(["flow", "--gen", "linear", "--z0", "0", "--t", "1"])
        .env("SPIRALLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn flow_examples() {
    let r = json(&run(&["flow", "--gen", "linear", "--z0", "0.4", "--t", &2f64.ln().to_string()]));
    assert!((r["endpoint"][0].as_f64().unwrap() - 0.2).abs() < 1e-10);
    let r = json(&run(&["flow", "--gen", "tanh", "--z0", "0,0", "--t", "1"]));
    assert!((r["endpoint"][0].as_f64().unwrap() - 1f64.tanh()).abs() < 1e-9);
    assert_eq!(r["pass"], true);
}

#[test]
fn spiral_check_examples() {
    let r = json(&run(&["spiral-check", "--fn", "koebe"]));
    assert_eq!(r["pass"], true);
    let c = r#"{"family":"mobius_spiral","c":[0.3,0]}"#;
    let r = json(&run(&["spiral-check", "--fn", c, "--mu", "1,0"]));
    assert!(r["margin"].as_f64().unwrap() > 0.69);
    let r = json(&run(&["spiral-check", "--gen", "logistic"]));
    assert_eq!(r["pass"], true);
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_owned()
}

#[test]
fn csv_dumps_and_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();

    let out = run(&["covering", "--fn", "koebe", "--grid", "10,12", "--dump-region", &p("region.csv"), "--out", &p("cov.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(p("cov.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "spirallab/1");
    assert_eq!(header(Path::new(&p("region.csv"))), "x_re,x_im,in_omega");
    assert_eq!(std::fs::read_to_string(p("region.csv")).unwrap().lines().count(), 121);

    let out = run(&["koenigs", "--gen", "logistic", "--grid", "5,6", "--schroder-samples", "5", "--out", &p("h.csv")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["subcommand"], "koenigs");
    assert_eq!(header(Path::new(&p("h.csv"))), "x_re,x_im,h_re,h_im,dh_re,dh_im");

    run(&["sharp-bound", "--lambda", "2,-3", "--r", "2", "--dump-curve", &p("f.csv"), "--curve-points", "50"]);
    assert_eq!(header(Path::new(&p("f.csv"))), "t,f,margin");
    assert_eq!(std::fs::read_to_string(p("f.csv")).unwrap().lines().count(), 51);

    run(&["gen-extend", "--gen", "linear", "--r", "1", "--m", "2", "--starts", "2", "--samples", "4", "--dump-traj", &p("t.csv")]);
    assert_eq!(header(Path::new(&p("t.csv"))), "start,t,x_re,x_im,y1_re,y1_im,y2_re,y2_im");

    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 5, "temporary files left behind: {leftovers:?}");
}

#[test]
fn scaled_covering_example() {
    let beta = (-0.5f64).exp().to_string();
    let c = r#"{"family":"mobius_spiral","c":[0.3,0]}"#;
    let r = json(&run(&["covering", "--fn", c, "--alpha", "0.1", "--beta", &beta, "--grid", "200,200"]));
    assert_eq!(r["pass"], true);
    let case = &r["result"]["cases"][0];
    assert!(case["x1"][0].as_f64().unwrap().abs() < 1e-12);
    let b = (-0.5f64).exp();
    assert!((case["predicted_radius"].as_f64().unwrap() - (b - 0.1) / (4.0 * b)).abs() < 1e-12);
}
