use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tauwork_cli::schema::schema;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tauwork")).args(args).env_remove(tauwork_cli::CONFIG_ENV).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn assert_valid(name: &str, v: &Value) {
    let s = schema(name).unwrap_or_else(|| panic!("no schema {name}"));
    let compiled = jsonschema::JSONSchema::compile(&s).unwrap();
    let msgs: Vec<String> = match compiled.validate(v) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{name} output violates its schema: {msgs:?}");
}

fn checked(args: &[&str], schema_name: &str, code: i32) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_valid(schema_name, &v);
    v
}

#[test]
fn intersect_prints_the_documented_line() {
    let out = run(&["intersect", "-g", "0", "-n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "{\"genus\":0,\"n\":3,\"numbers\":{\"(0,0,0)\":\"1\"}}\n");
    let v = checked(&["intersect", "-g", "1", "-n", "2"], "intersect", 0);
    assert_eq!(v["numbers"]["(1,1)"], "1/24");
    assert_eq!(v["numbers"]["(2,0)"], "1/24");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["intersect", "-g", "-1", "-n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["intersect", "-g", "0", "-n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["suite", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["matrix", "moment", "--word", "x3"]).status.code(), Some(2));
    assert_eq!(run(&["matrix", "hciz", "--x", "1", "--y", "1,2"]).status.code(), Some(2));
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8(help.stdout).unwrap();
    for sub in ["graphs", "intersect", "verify", "schur", "virasoro", "matrix", "torsion", "suite"] {
        assert!(text.contains(sub), "help lists {sub}");
    }
    assert!(!text.contains("inject-perturbation"));
}

#[test]
fn budget_errors_exit_three() {
    assert_eq!(run(&["intersect", "-g", "2", "-n", "3"]).status.code(), Some(3));
    assert_eq!(run(&["graphs", "enumerate", "-g", "0", "-n", "4", "--max-darts", "6"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"max_matchings": 10}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "matrix", "moment", "--word", "tr8"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["virasoro", "oscillator", "--check", "--cap", "4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_from_environment_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 7}"#).unwrap();
    let args = ["matrix", "hciz", "--x", "1,-1", "--y", "1,-1", "--samples", "5000"];
    let env = Command::new(env!("CARGO_BIN_EXE_tauwork")).args(args).env(tauwork_cli::CONFIG_ENV, &cfg).output().unwrap();
    let explicit = run(&[&args[..], &["--seed", "7"]].concat());
    assert_eq!(env.stdout, explicit.stdout);
    assert_eq!(json_of(&env)["seed"], 7);
    let overridden = Command::new(env!("CARGO_BIN_EXE_tauwork"))
        .args(args)
        .args(["--seed", "8"])
        .env(tauwork_cli::CONFIG_ENV, &cfg)
        .output()
        .unwrap();
    assert_eq!(json_of(&overridden)["seed"], 8);
    std::fs::write(&cfg, r#"{"sede": 7}"#).unwrap();
    let bad = Command::new(env!("CARGO_BIN_EXE_tauwork")).args(args).env(tauwork_cli::CONFIG_ENV, &cfg).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn graph_and_residual_reports() {
    let v = checked(&["graphs", "enumerate", "-g", "0", "-n", "3"], "graphs-enumerate", 0);
    assert_eq!(v["darts"], 6);
    assert!(v["count"].as_u64().unwrap() > 0);
    let v = checked(&["verify", "kdv"], "verify", 0);
    assert_eq!(v["pass"], true);
    let v = checked(&["verify", "string"], "verify", 0);
    assert!(v["verified_zero"].as_u64().unwrap() > 0);
    let v = checked(&["verify", "string", "--inject-perturbation", "1:1:1/2"], "verify", 1);
    assert!(v["nonzero"].as_u64().unwrap() > 0);
}

#[test]
fn schur_and_oscillator_reports() {
    let v = checked(&["schur", "--partition", "2,1", "--check-kp", "--check-hirota"], "schur", 0);
    assert_eq!(v["hirota"]["zero"], true);
    assert_eq!(v["kp_pde"]["zero"], true);
    let v = checked(&["virasoro", "oscillator", "--check", "--lambda", "2/3", "--cap", "10", "--range", "2"], "virasoro-oscillator", 0);
    assert_eq!(v["central_charge"], "19/3");
    assert_eq!(v["pass"], true);
    checked(&["virasoro", "oscillator", "--lambda", "1"], "virasoro-oscillator", 0);
}

#[test]
fn target_report_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("two.json");
    std::fs::write(&data, tauwork::fock::CohomologyData::two_class_sample().to_json().to_string()).unwrap();
    let report = dir.path().join("out.json");
    let v = checked(
        &["virasoro", "target", "--data", data.to_str().unwrap(), "--report", report.to_str().unwrap(), "--max-n", "1"],
        "virasoro-target",
        0,
    );
    assert_eq!(v["brackets"].as_array().unwrap().len(), 3);
    let full: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(full["reports"].as_array().unwrap().len(), 3);
    let v = checked(&["virasoro", "target", "--data", "point", "--max-n", "1"], "virasoro-target", 0);
    assert!(v["brackets"].as_array().unwrap().iter().all(|b| b["standard_holds"] == true));
    assert_eq!(run(&["virasoro", "target", "--data", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn matrix_reports() {
    let v = checked(&["matrix", "moment", "--N", "3", "--lambda", "3,4,5", "--word", "tr3^2"], "matrix-moment", 0);
    assert_eq!(v["mode"], "diagonal");
    let v = checked(&["matrix", "moment", "--N", "2", "--word", "tr4"], "matrix-moment", 0);
    assert_eq!(v["moment"]["N^1"], "2");
    assert_eq!(v["at_N"]["value"], "9/2");
    let v = checked(&["matrix", "genus", "--word", "tr6"], "matrix-genus", 0);
    assert_eq!(v["genus"]["g0"], "5");
    let v = checked(&["matrix", "match", "--order", "2"], "matrix-match", 0);
    assert_eq!(v["equal"], true);
    checked(&["matrix", "normalization", "--lambda", "1,2"], "matrix-normalization", 0);
    let v = checked(&["matrix", "hciz", "--x", "1,-1", "--y", "1,-1", "--samples", "200000", "--seed", "7"], "matrix-hciz", 0);
    assert_eq!(v["seed"], 7);
    assert_eq!(run(&["matrix", "normalization", "--lambda", "1,2,3"]).status.code(), Some(2));
}

#[test]
fn csv_tables() {
    let out = run(&["intersect", "-g", "1", "-n", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "genus,n,tuple,value\n1,2,\"(1,1)\",1/24\n1,2,\"(2,0)\",1/24\n");
    let out = run(&["matrix", "genus", "--word", "tr4", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "word,genus,pairings\ntr4,0,2\ntr4,1,1\n");
    assert_eq!(run(&["matrix", "match", "--format", "csv"]).status.code(), Some(2));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn torsion_command() {
    let dir = tempfile::tempdir().unwrap();
    let five = write(dir.path(), "five.json", r#"{"ranks":[1,1],"boundaries":[[[5]]]}"#);
    let v = checked(&["torsion", "--complex", &five], "torsion", 0);
    assert_eq!(v["torsion"], "1/5");
    assert_eq!(v["order_check"]["orders"][0], "5");
    let half = write(dir.path(), "half.json", r#"{"ranks":[1,1],"boundaries":[[["1/2"]]]}"#);
    let v = checked(&["torsion", "--complex", &half], "torsion", 0);
    assert_eq!(v["torsion"], "2");
    assert!(v["order_check"].is_null());
    let zero = write(dir.path(), "zero.json", r#"{"ranks":[1,1],"boundaries":[[[0]]]}"#);
    let v = checked(&["torsion", "--complex", &zero], "torsion", 1);
    assert_eq!(v["acyclic"], false);
    let bad = write(dir.path(), "bad.json", r#"{"ranks":[1,1,1],"boundaries":[[[1]],[[1]]]}"#);
    assert_eq!(run(&["torsion", "--complex", &bad]).status.code(), Some(2));
}

#[test]
fn output_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["intersect", "-g", "0", "-n", "3", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "{\"genus\":0,\"n\":3,\"numbers\":{\"(0,0,0)\":\"1\"}}\n");
}

#[test]
fn threads_do_not_change_output() {
    let args = ["matrix", "hciz", "--x", "0.4,-0.9", "--y", "1.1,0.2", "--samples", "50000", "--seed", "3"];
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    let four = run(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn injected_perturbation_names_the_failing_criteria() {
    let out = run(&["suite", "full", "--inject-perturbation", "0:0,0,0"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_valid("suite", &v);
    let failed: Vec<u64> = v["failed"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert!(failed.contains(&1) && failed.contains(&4), "{failed:?}");
    let names: Vec<&str> = v["criteria"].as_array().unwrap().iter().filter(|c| c["pass"] == false).map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"intersection base cases"));
}

#[test]
fn every_schema_parses() {
    for (name, _) in tauwork_cli::schema::SCHEMAS {
        assert!(jsonschema::JSONSchema::compile(&schema(name).unwrap()).is_ok(), "{name}");
    }
}
