use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

struct Env {
    cache: tempfile::TempDir,
    work: tempfile::TempDir,
}

impl Env {
    fn new() -> Self {
        Self { cache: tempfile::tempdir().unwrap(), work: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> std::path::PathBuf {
        self.work.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_geoproj"))
            .args(args)
            .env("GEOPROJ_CACHE_DIR", self.cache.path())
            .current_dir(self.work.path())
            .output()
            .unwrap()
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const LINE: &str = r#"{"terms": [{"i": 1, "j": 0, "c": "1"}, {"i": 0, "j": 1, "c": "1"}, {"i": 0, "j": 0, "c": "-1"}]}"#;
const HORIZONTAL: &str = r#"{"terms": [{"i": 0, "j": 1, "c": "1"}, {"i": 0, "j": 0, "c": "-5"}]}"#;

#[test]
fn modpoly_commands() {
    let env = Env::new();
    let o = env.run(&["modpoly", "1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let mut terms: Vec<(u64, u64, String)> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["i"].as_u64().unwrap(), t["j"].as_u64().unwrap(), t["c"].as_str().unwrap().to_string()))
        .collect();
    terms.sort();
    assert_eq!(terms, vec![(0, 1, "-1".to_string()), (1, 0, "1".to_string())]);

    let out = env.path("phi2.json");
    let o = env.run(&["modpoly", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = read_json(&out);
    assert!(v["terms"].as_array().unwrap().len() >= 9);
    assert_eq!(v["degree"], 3);
    // written to the cache directory as well
    assert!(env.cache.path().join("v1").join("modpoly_2.json").exists());

    let o = env.run(&["modpoly", "99"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds"));
}

#[test]
fn j_commands() {
    let env = Env::new();
    let o = env.run(&["j-eval", "0", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["j"]["re"].as_str().unwrap().starts_with("1728.0000"));
    assert_eq!(v["prec"], 192);
    let o = env.run(&["j-inv", "0", "0", "--format", "json", "--prec", "128"]);
    assert_eq!(code(&o), 0);
    let z = &json(&o)["z"];
    assert!(z["re"].as_str().unwrap().starts_with("-5.000"));
    assert_eq!(code(&env.run(&["j-eval", "0", "-1"])), 64);
    assert_eq!(code(&env.run(&["j-eval", "0", "1", "--prec", "32"])), 64);
}

#[test]
fn geodesic_commands() {
    let env = Env::new();
    let o = env.run(&["geodesic", "endpoints", "0", "2", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["det"], "-2");
    assert_eq!(v["quadratic"], true);
    let o = env.run(&["geodesic", "conjugate", "--by", "1", "1", "0", "1", "0", "2", "1"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "1 1 1");
    let svg = env.path("g.svg");
    let o = env.run(&["geodesic", "plot", "0,2,1", "1,0,0", "--svg", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains(" A") && text.contains("<line"));
    assert_eq!(code(&env.run(&["geodesic", "locus", "0", "0", "0"])), 64);
}

#[test]
fn zn_traces() {
    let env = Env::new();
    let svg = env.path("z2.svg");
    let o = env.run(&["trace", "zn", "2", "--bbox", "-2000", "10000", "-5000", "5000", "--svg", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(!v["branches"].as_array().unwrap().is_empty());
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.matches("<path").count() >= 1);

    let o = env.run(&["trace", "zn", "1", "--bbox", "-10", "10", "-10", "10", "--step", "0.5"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let branches = v["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 1);
    assert!(branches[0]["points"].as_array().unwrap().iter().all(|p| p[1].as_f64().unwrap() == 0.0));

    let o = env.run(&["trace", "zn", "2", "--bbox", "100000", "100001", "100000", "100001", "--grid", "8"]);
    assert_eq!(code(&o), 3);

    let o = env.run(&["zn", "certify", "2", "8000", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["certificate"]["det"], "-2");
}

#[test]
fn intersection_trace() {
    let env = Env::new();
    let phi2 = env.path("phi2.json");
    assert_eq!(code(&env.run(&["modpoly", "2", "--out", phi2.to_str().unwrap()])), 0);
    let svg = env.path("i.svg");
    let o = env.run(&["trace", "intersect", "--curve", phi2.to_str().unwrap(), "--M", "1", "--svg", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["M"], 1);
    let branches = v["branches"].as_array().unwrap();
    assert!(!branches.is_empty());
    for b in branches {
        assert!(b["max_residual"].as_f64().unwrap() <= 1e-8);
        assert_eq!(b["points"][0].as_array().unwrap().len(), 4);
    }
    assert!(std::fs::read_to_string(svg).unwrap().contains("second plane"));

    let line = env.write("line.json", LINE);
    let o = env.run(&["restrict", "--curve", &line]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["re"]["vars"][0], "X1");
}

#[test]
fn detect_verdicts() {
    let env = Env::new();
    let phi2 = env.path("phi2.json");
    assert_eq!(code(&env.run(&["modpoly", "2", "--out", phi2.to_str().unwrap()])), 0);
    let o = env.run(&["detect", "--curve", phi2.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["verdict"], "strongly_special");
    assert_eq!(v["N"], 2);

    let line = env.write("line.json", LINE);
    let first = env.run(&["detect", "--curve", &line]);
    assert!(matches!(code(&first), 1 | 4), "exit {}", code(&first));
    assert_ne!(json(&first)["verdict"], "strongly_special");
    // reruns are byte-identical
    let second = env.run(&["detect", "--curve", &line]);
    assert_eq!(first.stdout, second.stdout);

    let h = env.write("h.json", HORIZONTAL);
    assert_eq!(code(&env.run(&["detect", "--curve", &h])), 64);
    assert_eq!(code(&env.run(&["detect", "--curve", "missing.json"])), 64);
}

#[test]
fn usage_errors() {
    let env = Env::new();
    assert_eq!(code(&env.run(&["no-such-command"])), 64);
    assert_eq!(code(&env.run(&["modpoly"])), 64);
    assert_eq!(code(&env.run(&["--help"])), 0);
}
