use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_fpk");

fn base_config(task: &str, extra: &str) -> String {
    format!(
        r#"{{
  "model": {{ "n": 1, "k1": [1.0], "k2": [0.0], "k3": [-0.5], "epsilon": 0.1, "kappa": 1.0 }},
  "initial": {{ "mixture": {{ "weights": [1.0], "means": [[0.5]], "b0": [[1.0]], "c0": [[1.0]] }} }},
  "time": {{ "s": 0.0, "t": 1.0, "snapshots": [0.0, 1.0] }},
  "grid": {{ "x_min": -4.0, "x_max": 4.0, "nx": 161, "dt": 1e-3 }},
  "task": "{task}"{extra}
}}"#
    )
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(BIN).args(args).env("FPK_OUTPUT_DIR", out).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn evolve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &base_config("evolve", ""));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["run", cfg.to_str().unwrap()], &a).0, 0);
    assert_eq!(run(&["run", cfg.to_str().unwrap()], &b).0, 0);
    for f in ["snapshots.csv", "report.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.join("snapshots.csv")).unwrap();
    assert!(csv.starts_with("t,x,u\n"));
    assert_eq!(rows(&csv).len(), 2 * 161);
    assert!(a.join("run_meta.json").exists());
}

#[test]
fn evolve_at_initial_time_returns_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut samples = String::from("x,u\n");
    for i in 0..201 {
        let x = -5.0 + 0.05 * i as f64;
        let u = (-x * x / 0.5).exp() / (0.5 * std::f64::consts::PI).sqrt();
        samples.push_str(&format!("{x},{u}\n"));
    }
    write(dir.path(), "g.csv", &samples);
    let text = base_config("evolve", "")
        .replace(
            r#"{ "mixture": { "weights": [1.0], "means": [[0.5]], "b0": [[1.0]], "c0": [[1.0]] } }"#,
            r#"{ "sampled": { "path": "g.csv" } }"#,
        )
        .replace(r#""snapshots": [0.0, 1.0]"#, r#""snapshots": [0.0]"#);
    let cfg = write(dir.path(), "c.json", &text);
    let out = dir.path().join("o");
    assert_eq!(run(&["run", cfg.to_str().unwrap()], &out).0, 0);
    let got = rows(&std::fs::read_to_string(out.join("snapshots.csv")).unwrap());
    let want = rows(&samples.replace("x,u\n", "t,x,u\n").lines().map(|l| format!("0,{l}")).collect::<Vec<_>>().join("\n"));
    assert_eq!(got.len(), 201);
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g[2], w[2]);
    }
}

#[test]
fn identity_symmetry_reproduces_solution() {
    let dir = tempfile::tempdir().unwrap();
    let sym = write(dir.path(), "s.json", &base_config("symmetry", r#", "symmetry": { "operator": "identity" }"#));
    let ev = write(dir.path(), "e.json", &base_config("evolve", ""));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["run", sym.to_str().unwrap()], &a).0, 0);
    assert_eq!(run(&["run", ev.to_str().unwrap()], &b).0, 0);
    let ra = rows(&std::fs::read_to_string(a.join("snapshots.csv")).unwrap());
    let rb = rows(&std::fs::read_to_string(b.join("snapshots.csv")).unwrap());
    assert_eq!(ra.len(), rb.len());
    for (x, y) in ra.iter().zip(&rb) {
        assert!((x[2] - y[2]).abs() <= 1e-12);
    }
}

#[test]
fn verify_passes_on_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#", "symmetry": { "operator": "linsym", "x_gamma_a": [0.9] }"#;
    let cfg = write(dir.path(), "c.json", &base_config("verify", extra).replace("\"nx\": 161", "\"nx\": 401"));
    let out = dir.path().join("o");
    let (code, err) = run(&["verify", cfg.to_str().unwrap()], &out);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 9);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // a coarse grid whose finite-difference error exceeds the stated tolerance
    let cfg = write(
        dir.path(),
        "c.json",
        &base_config("verify", "").replace("\"nx\": 161", "\"nx\": 41").replace("1e-3", "1e-2"),
    );
    assert_eq!(run(&["run", cfg.to_str().unwrap()], &dir.path().join("o")).0, 1);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.json", &base_config("evolve", r#", "colour": "blue""#));
    let (code, err) = run(&["run", unknown.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("unknown field"), "{err}");
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["run", missing.to_str().unwrap()], dir.path()).0, 2);
    let unstable = write(dir.path(), "cfl.json", &base_config("verify", "").replace("1e-3", "0.5"));
    assert_eq!(run(&["run", unstable.to_str().unwrap()], dir.path()).0, 2);
}

#[test]
fn numerical_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    // mass 2 in normalized mode
    let cfg = write(dir.path(), "c.json", &base_config("evolve", "").replace("\"weights\": [1.0]", "\"weights\": [2.0]"));
    let (code, err) = run(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 3);
    assert!(err.contains("normalization"), "{err}");
    // zero-mass operator output without a supplied moment
    let sym = write(dir.path(), "s.json", &base_config("symmetry", r#", "symmetry": { "operator": "linsym" }"#));
    let (code, err) = run(&["run", sym.to_str().unwrap()], dir.path());
    assert_eq!(code, 3);
    assert!(err.contains("degenerate-moment"), "{err}");
}

#[test]
fn schema_is_json() {
    let o = Command::new(BIN).arg("print-schema").output().unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["additionalProperties"], false);
}

#[test]
fn bundled_config_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/example_1d.json");
    let cfg = fpk_core::cli::config::RunConfig::load(&path).unwrap();
    cfg.prepare(path.parent().unwrap()).unwrap();
}
