//! Exit codes and worked examples, driven through the actual binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polared"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code (signal?)")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

const PLANE_SQRT: &str = r#"
r0 = 1.0
[measure]
kind = "euclidean"
dim = 2
[b]
kind = "constant"
value = 1.0
[f]
kind = "power"
p = 0.5
[solver]
method = "collocation"
half_length = 2.0
interior_nodes = 99
bc = 0.5
[output]
dir = "out"
"#;

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("frobnicate"));
}

#[test]
fn missing_config_file_is_config_error() {
    let out = run(&["reduce", "-c", "/definitely/not/here.toml"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cannot read config"));
}

#[test]
fn unknown_key_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "r0 = 1.0\nbogus = 3\n");
    let out = run(&["reduce", "-c", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown field"));
}

#[test]
fn reduce_needs_its_section() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), PLANE_SQRT);
    let out = run(&["reduce", "-c", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("[reduce]"));
}

// the plane with a square root passes the gate: the report stays short of
// fails, so the exit stays 0
#[test]
fn verify_accepts_the_plane_with_sublinear_power() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), PLANE_SQRT);
    let out = run(&["verify", "-c", path.to_str().unwrap(), "--require-hypotheses"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(!text.contains("overall: fails"), "report:\n{text}");
    for name in [
        "report.txt",
        "evidence_domain_image.csv",
        "evidence_linear_positive.csv",
        "evidence_nonlinearity_growth.csv",
    ] {
        assert!(dir.path().join("out").join(name).exists(), "{name} missing");
    }
}

#[test]
fn linear_f_is_rejected_by_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &PLANE_SQRT.replace("p = 0.5", "p = 1.0"));
    let path = path.to_str().unwrap();

    let out = run(&["solve", "-c", path, "--require-hypotheses"]);
    assert_eq!(code(&out), 4);
    assert!(stdout(&out).contains("overall: fails"));
    assert!(!dir.path().join("out").join("solution.csv").exists());

    let out = run(&["verify", "-c", path, "--require-hypotheses"]);
    assert_eq!(code(&out), 4);
    // the report is still written; only the exit code refuses
    assert!(dir.path().join("out").join("report.txt").exists());

    // without the flag the verdict is informational
    let out = run(&["verify", "-c", path]);
    assert_eq!(code(&out), 0);
}

// on H^2 the transversal image is bounded, so a truncation of half-length 4
// leaves the coefficient undefined — a numeric failure, not a config one
#[test]
fn truncation_beyond_the_image_is_a_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = PLANE_SQRT
        .replace("kind = \"euclidean\"", "kind = \"hyperbolic\"")
        .replace("method = \"collocation\"", "method = \"green\"")
        .replace("half_length = 2.0", "half_length = 4.0");
    let path = write_config(dir.path(), &body);
    let out = run(&["solve", "-c", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("outside the image"));
}

// reducing the unit sphere about the equator puts r = 2 at
// s = ln tan 1 ~ 0.4430
#[test]
fn sphere_reduction_matches_the_log_tangent() {
    let dir = tempfile::tempdir().unwrap();
    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/sphere_s2.toml");
    let path = dir.path().join("sphere_s2.toml");
    fs::copy(shipped, &path).unwrap();
    let out = run(&["reduce", "-c", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let csv = fs::read_to_string(dir.path().join("out").join("reduce.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,s,phi,q"));
    let row = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .find(|row| (row[0] - 2.0).abs() < 1e-12)
        .expect("r = 2.0 should be sampled");
    assert!((row[1] - 1.0f64.tan().ln()).abs() <= 1e-8, "s(2.0) = {}", row[1]);
    // q = b phi^2 = sin(2)^2 on the unit sphere with b = 1
    assert!((row[3] - 2.0f64.sin().powi(2)).abs() <= 1e-12);
}

#[test]
fn measures_lists_builtins() {
    let out = run(&["measures"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for kind in ["euclidean", "sphere", "hyperbolic", "flat_cylinder"] {
        assert!(text.contains(kind), "{kind} missing from the listing");
    }
}
