use std::path::PathBuf;
use std::process::Command;

use pathregret::cli::run;
use serde_json::Value;
use tempfile::TempDir;

const T1: &str = r#"{"vertices": [
  {"position": "0", "w_min": "0", "w_max": "2"},
  {"position": "1", "w_min": "0", "w_max": "2"},
  {"position": "2", "w_min": "0", "w_max": "2"}],
  "capacities": ["1", "2"]}"#;

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Files {
        let f = Files {
            dir: TempDir::new().unwrap(),
        };
        f.put("t1.json", T1);
        f.put("sA.json", r#"{"weights": ["1", "0", "1"]}"#);
        f
    }

    fn put(&self, name: &str, text: &str) -> String {
        let p: PathBuf = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }
}

fn call(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["pathregret"];
    argv.extend_from_slice(args);
    let out = run(argv);
    (out.code, out.stdout)
}

fn json(args: &[&str]) -> Value {
    let (code, out) = call(args);
    assert_eq!(code, 0, "{out}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn minmax_regret_t1() {
    let f = Files::new();
    let v = json(&["minmax-regret", "--instance", &f.path("t1.json")]);
    assert_eq!(v["location"], "1");
    assert_eq!(v["value"], "3");
    assert_eq!(v["value_decimal"], 3.0);
    assert!(v["witness"]["family"].is_string());
}

#[test]
fn evacuate_t1() {
    let f = Files::new();
    let v = json(&[
        "evacuate",
        "--instance",
        &f.path("t1.json"),
        "--scenario",
        &f.path("sA.json"),
        "--sink",
        "1",
    ]);
    assert_eq!(v["theta_left"], "2");
    assert_eq!(v["theta_right"], "3/2");
    assert_eq!(v["theta"], "2");
    assert_eq!(v["theta_right_decimal"], 1.5);
}

#[test]
fn other_solvers() {
    let f = Files::new();
    let (t1, sa) = (f.path("t1.json"), f.path("sA.json"));
    let v = json(&["optimal-sink", "--instance", &t1, "--scenario", &sa]);
    assert_eq!(v["value"], "2");
    let v = json(&["regret", "--instance", &t1, "--scenario", &sa, "--sink", "0"]);
    assert_eq!(v["theta"], "3");
    assert_eq!(v["regret"], "1");
    let v = json(&["maxregret", "--instance", &t1, "--sink", "2"]);
    assert_eq!(v["value"], "4");
    let v = json(&["maxregret", "--instance", &t1, "--sink", "1/2"]);
    assert_eq!(v["sink_vertex"], Value::Null);
}

#[test]
fn validation_errors_exit_one() {
    let f = Files::new();
    let bad = f.put(
        "bad.json",
        r#"{"vertices": [{"position": "0", "w_min": "1", "w_max": "0"},
            {"position": "0", "w_min": "0", "w_max": "1"}], "capacities": ["-1"]}"#,
    );
    let (code, out) = call(&["validate", "--instance", &bad]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["ok"], false);
    assert_eq!(v["errors"].as_array().unwrap().len(), 3);
    let v = json(&["validate", "--instance", &f.path("t1.json")]);
    assert_eq!(v["ok"], true);

    let garbled = f.put("garbled.json", "{\"vertices\": [");
    assert_eq!(call(&["validate", "--instance", &garbled]).0, 1);
    assert_eq!(call(&["validate", "--instance", &f.path("missing.json")]).0, 1);
    let short = f.put("short.json", r#"{"weights": ["1"]}"#);
    assert_eq!(
        call(&["optimal-sink", "--instance", &f.path("t1.json"), "--scenario", &short]).0,
        1
    );
}

#[test]
fn sink_outside_path_rejected() {
    let f = Files::new();
    let t1 = f.path("t1.json");
    assert_eq!(call(&["maxregret", "--instance", &t1, "--sink", "5/2"]).0, 1);
    assert_eq!(call(&["maxregret", "--instance", &t1, "--sink=-1"]).0, 1);
    assert_eq!(call(&["maxregret", "--instance", &t1, "--sink", "one"]).0, 1);
}

#[test]
fn usage_errors_exit_two() {
    let f = Files::new();
    assert_eq!(call(&[]).0, 2);
    assert_eq!(call(&["frobnicate"]).0, 2);
    assert_eq!(
        call(&["minmax-regret", "--instance", &f.path("t1.json"), "--fast"]).0,
        2
    );
    assert_eq!(call(&["evacuate", "--instance", &f.path("t1.json")]).0, 2);
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn output_is_deterministic() {
    let f = Files::new();
    let args = ["minmax-regret", "--instance", &f.path("t1.json")];
    let a = call(&args).1;
    assert_eq!(a, call(&args).1);
    let keys: Vec<&str> = a.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn oracle_modes() {
    let f = Files::new();
    let (t1, sa) = (f.path("t1.json"), f.path("sA.json"));
    let v = json(&[
        "oracle",
        "simulate",
        "--instance",
        &t1,
        "--scenario",
        &sa,
        "--sink",
        "1",
        "--dt",
        "1/64",
    ]);
    assert_eq!(v["exact"], "2");
    let sim = v["simulated_decimal"].as_f64().unwrap();
    assert!((sim - 2.0).abs() <= 4.0 / 64.0, "{sim}");
    let v = json(&["oracle", "grid-rmax", "--instance", &t1, "--sink", "1", "--grid", "1/4"]);
    assert_eq!(v["grid_value"], "3");
    assert_eq!(v["exact"], "3");
    let v = json(&["oracle", "sweep", "--instance", &t1, "--grid", "1/4", "--samples", "8"]);
    assert_eq!(v["grid_value"], v["exact"]);
    let v = json(&["oracle", "shift", "--instance", &t1, "--trials", "100", "--seed", "7"]);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    assert_eq!(call(&["oracle", "simulate", "--instance", &t1]).0, 1);
    assert_eq!(call(&["oracle", "sweep", "--instance", &t1, "--grid", "0"]).0, 1);
    assert_eq!(call(&["oracle", "nonsense", "--instance", &t1]).0, 2);
}

#[test]
fn dump_pwl_names() {
    let f = Files::new();
    let t1 = f.path("t1.json");
    let dump = |name: &str| {
        let (code, out) = call(&["dump-pwl", "--instance", &t1, "--name", name]);
        assert_eq!(code, 0, "{name}: {out}");
        assert!(out.starts_with("q,value,slope_right\n"), "{out}");
        out
    };
    dump("lue:0:1");
    dump("rue:2:1");
    dump("medge:0:2:0");
    dump("F:0:1:2");
    assert_eq!(dump("mk:0:2:1"), "q,value,slope_right\n0,0,\n0,1,1/3\n3,2,1\n4,3,\n");
    for bad in ["lue:0", "mk:2:0:1", "xyz:0:1", "lue:a:1", "F:0:1:0"] {
        assert_eq!(call(&["dump-pwl", "--instance", &t1, "--name", bad]).0, 1, "{bad}");
    }
}

#[test]
fn binary_exit_codes() {
    let f = Files::new();
    let bin = env!("CARGO_BIN_EXE_pathregret");
    let out = Command::new(bin)
        .args(["minmax-regret", "--instance", &f.path("t1.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], "3");
    let out = Command::new(bin).args(["minmax-regret", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
