use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use energetic::verify::CertificateReport;

const SCALAR: &str = r#"
initial_state = [0.0]

[model]
name = "convex_pointwise"
weights = [1.0]
alpha = [1.0]
beta = 2.0
dissipation = 1.0
loads = [{ kind = "affine", offset = 0.0, slope = 2.0 }]

[grid]
nodes = [0.0, 1.0, 2.0]

[strategy]
method = "exact_pointwise"
"#;

fn energetic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_energetic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_play_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let out = dir.path().join("out");
    let res = energetic(&["run", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));

    let mut reader = csv::Reader::from_path(out.join("trajectory.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "t");
    assert_eq!(&headers[1], "z0");
    let z: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    assert_eq!(z, vec![0.0, 0.5, 1.5]);
    assert!(out.join("run.json").exists());
}

#[test]
fn verify_passes_and_matches_saved_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let fresh = dir.path().join("fresh");
    let saved = dir.path().join("saved");

    let res = energetic(&["verify", "--config", p(&cfg), "--out", p(&fresh)]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    assert!(String::from_utf8_lossy(&res.stdout).contains("PASS"));

    assert_eq!(energetic(&["run", "--config", p(&cfg), "--out", p(&saved)]).status.code(), Some(0));
    let res = energetic(&["verify", "--run", p(&saved.join("run.json")), "--out", p(&saved)]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));

    let a = fs::read_to_string(fresh.join("certificate.json")).unwrap();
    let b = fs::read_to_string(saved.join("certificate.json")).unwrap();
    assert_eq!(a, b);
    let report: CertificateReport = serde_json::from_str(&a).unwrap();
    assert!(report.passed);
    assert!(fresh.join("certificate.csv").exists());
}

#[test]
fn empty_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SCALAR.replace("nodes = [0.0, 1.0, 2.0]", "nodes = []"));
    let res = energetic(&["run", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("grid requires ≥ 2 nodes"), "{}", stderr(&res));
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SCALAR.replace("beta = 2.0", "beta = \"two\""));
    let res = energetic(&["run", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn missing_run_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing.json");
    let res = energetic(&["verify", "--run", p(&missing), "--out", p(dir.path())]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("missing run"), "{}", stderr(&res));
}

#[test]
fn list_models_names_all_five() {
    let res = energetic(&["list-models"]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8_lossy(&res.stdout);
    for name in ["convex_pointwise", "gradient_nonconvex", "two_phase", "delamination", "plasticity_point"] {
        assert!(text.contains(name), "{name} missing from {text}");
    }
}

#[test]
fn constant_load_keeps_state() {
    let dir = tempfile::tempdir().unwrap();
    let text = SCALAR
        .replace(r#"{ kind = "affine", offset = 0.0, slope = 2.0 }"#, r#"{ kind = "affine", offset = 0.5, slope = 0.0 }"#)
        .replace("nodes = [0.0, 1.0, 2.0]", "horizon = 1.0\nsteps = 4");
    let cfg = write_config(dir.path(), &text);
    let res = energetic(&["run", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let mut reader = csv::Reader::from_path(dir.path().join("trajectory.csv")).unwrap();
    let rows: Vec<Vec<String>> = reader
        .records()
        .map(|r| r.unwrap().iter().skip(1).map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[0] == w[1]), "{rows:?}");
}

#[test]
fn refine_writes_level_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCALAR);
    let res = energetic(&["refine", "--config", p(&cfg), "--out", p(dir.path()), "--levels", "3"]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let mut reader = csv::Reader::from_path(dir.path().join("refinement.csv")).unwrap();
    assert!(reader.headers().unwrap().iter().any(|h| h == "energy_gap"));
    let steps: Vec<usize> = reader.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(steps, vec![2, 4, 8]);
    assert!(dir.path().join("refinement.json").exists());
}

const DELAMINATION: &str = r#"
initial_state = [1.0, 1.0]

[model]
name = "delamination"
springs = [1.0, 1.0]
clamped = CLAMPED
dissipation = 0.2
glue = [{ node = 1, stiffness = 1.0 }, { node = 2, stiffness = 1.0 }]
loading = { control = "CONTROL", load = { kind = "affine", offset = 0.0, slope = 1.0 } }

[grid]
horizon = 2.0
steps = 8

[strategy]
method = "grid_search"
resolution = 5
rounds = 2
"#;

#[test]
fn delamination_run_is_irreversible() {
    let dir = tempfile::tempdir().unwrap();
    let text = DELAMINATION.replace("CLAMPED", "true").replace("CONTROL", "displacement");
    let cfg = write_config(dir.path(), &text);
    let res = energetic(&["run", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let mut reader = csv::Reader::from_path(dir.path().join("trajectory.csv")).unwrap();
    let z: Vec<[f64; 2]> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            [r[1].parse().unwrap(), r[2].parse().unwrap()]
        })
        .collect();
    assert!(z.windows(2).all(|w| w[1][0] <= w[0][0] && w[1][1] <= w[0][1]), "{z:?}");
    assert!(z.last().unwrap().iter().any(|&v| v < 1.0), "glue never broke: {z:?}");
    assert!(dir.path().join("equilibria.csv").exists());
}

#[test]
fn floating_chain_under_force_is_a_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = DELAMINATION.replace("CLAMPED", "false").replace("CONTROL", "force");
    let cfg = write_config(dir.path(), &text);
    let res = energetic(&["run", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(res.status.code(), Some(3), "{}", stderr(&res));
    assert!(stderr(&res).contains("rigid translation"), "{}", stderr(&res));
}
