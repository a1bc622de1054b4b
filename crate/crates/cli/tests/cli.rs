use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn expfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expfield")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn structured(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("structured output is json")
}

const SMOKE: &str = r#"
seed = 11
omega = "w"

[[variety]]
catalog = "graph"

[[step]]
op = "domain"
alpha = "t"
parity = "real"

[[step]]
op = "image"
beta = "b"
parity = "real"

[[step]]
op = "sol"
variety = "graph"

[[step]]
op = "roots"
variety = "graph"
q_max = 2
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_reports_flags_and_kummer() {
    let o = expfield(&["check", "catalog:graph"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = expfield(&["--format", "structured", "check", "catalog:square", "--kummer", "2"]);
    assert_eq!(code(&o), 1);
    assert_eq!(structured(&o)["kummer_generic"]["holds"], Value::Bool(false));
    let o = expfield(&["check", "catalog:product"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn variety_files_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let toml = write(
        dir.path(),
        "cubic.toml",
        "name = \"cubic\"\nn = 1\nparams = [\"u\"]\nadditive = [\"u\"]\nmultiplicative = [\"u^3 + u\"]\n",
    );
    let o = expfield(&["--format", "structured", "check", &toml]);
    assert_eq!(code(&o), 0);
    assert_eq!(structured(&o)["name"], Value::String("cubic".into()));
    let bad = write(dir.path(), "bad.toml", "name = \"x\"\nn = 1\n");
    assert_eq!(code(&expfield(&["check", &bad])), 2);
    assert_eq!(code(&expfield(&["check", "catalog:nothing"])), 2);
}

#[test]
fn realize_and_restriction_check() {
    let o = expfield(&["--format", "structured", "realize", "catalog:line"]);
    assert_eq!(code(&o), 0);
    let v = structured(&o);
    assert_eq!(v["dim"], 2);
    assert_eq!(v["witness_holds"], Value::Bool(true));
    assert_eq!(code(&expfield(&["restrict-check", "catalog:graph", "--bound", "2"])), 0);
    // not absolutely free
    assert_eq!(code(&expfield(&["restrict-check", "catalog:v-mn"])), 2);
}

#[test]
fn matrix_lemmas() {
    let o = expfield(&["--format", "structured", "decompose", "--N", "[[1,2,0]]", "--P", "[[0,1,1],[3,0,1]]"]);
    assert_eq!(code(&o), 0);
    assert_eq!(structured(&o)["verified"], Value::Bool(true));
    let o = expfield(&["reduce", "--M", "[[1,0,2,1],[0,3,1,1]]"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("verified: yes"));
    assert_eq!(code(&expfield(&["reduce", "--M", "[[1,2,3]]"])), 2);
}

#[test]
fn act_on_a_point() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.toml", "additive = [\"t\", \"1\"]\nmultiplicative = [\"t\", \"2\"]\n");
    let o = expfield(&["--format", "structured", "act", "--M", "[[2,1]]", "--point", &p]);
    assert_eq!(code(&o), 0);
    let v = structured(&o);
    assert_eq!(v["additive"][0], Value::String("2*t + 1".into()));
    assert_eq!(v["multiplicative"][0], Value::String("2*t^2".into()));
}

#[test]
fn run_then_audit_the_saved_state() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(dir.path(), "smoke.toml", SMOKE);
    let out = dir.path().join("report.json");
    let state = dir.path().join("state.json");
    let o = expfield(&["run", &script, "--out", out.to_str().unwrap(), "--state-out", state.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["green"], Value::Bool(true));
    assert_eq!(code(&expfield(&["audit", state.to_str().unwrap()])), 0);

    let again = dir.path().join("again.json");
    expfield(&["run", &script, "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn undeclared_variety_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(dir.path(), "bad.toml", "[[step]]\nop = \"sol\"\nvariety = \"graph\"\n");
    let o = expfield(&["--format", "structured", "run", &script]);
    assert_eq!(code(&o), 2);
    assert!(structured(&o)["error"].as_str().unwrap().contains("graph"));
}
