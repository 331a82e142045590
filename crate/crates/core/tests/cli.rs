use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cylfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylfit"))
        .args(args)
        .output()
        .expect("cylfit binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn generated(dir: &TempDir, noise: &str, seed: &str) -> PathBuf {
    let path = dir.path().join(format!("cloud-{seed}.csv"));
    let out = cylfit(&[
        "generate",
        "--n",
        "300",
        "--radius",
        "2.5",
        "--height",
        "6",
        "--axis-point",
        "1,-2,0.5",
        "--axis-dir",
        "-0.2,0.4,1",
        "--noise",
        noise,
        "--seed",
        seed,
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

fn vec3(v: &Value) -> [f64; 3] {
    let a = v.as_array().unwrap();
    [
        a[0].as_f64().unwrap(),
        a[1].as_f64().unwrap(),
        a[2].as_f64().unwrap(),
    ]
}

#[test]
fn fit_recovers_noiseless_cylinder() {
    let dir = TempDir::new().unwrap();
    let input = generated(&dir, "0", "3");
    let out = cylfit(&["fit", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);

    assert!((report["radius"].as_f64().unwrap() - 2.5).abs() < 1e-9);
    let a = vec3(&report["axis_direction"]);
    let n = (0.04f64 + 0.16 + 1.0).sqrt();
    let dot = (-0.2 * a[0] + 0.4 * a[1] + a[2]) / n;
    assert!(dot.abs() > 1.0 - 1e-12);
    assert!(report["dbar2"].as_f64().unwrap() <= 1e-14 * 6.0f64.powi(4));
    assert_eq!(report["degeneracy"], "none");
    assert!(report["diagnostics"]["converged"].as_bool().unwrap());
    assert!(report.get("residuals").is_none());
}

#[test]
fn fit_writes_output_file_and_residuals() {
    let dir = TempDir::new().unwrap();
    let input = generated(&dir, "0.01", "4");
    let output = dir.path().join("fit.json");
    let out = cylfit(&[
        "fit",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--residuals",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(output).unwrap()).unwrap();
    let residuals = report["residuals"].as_array().unwrap();
    assert_eq!(residuals.len(), 300);
    assert!(residuals.iter().all(|r| r.as_f64().unwrap() >= 0.0));
}

#[test]
fn eval_reports_distance_to_surface() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "p.csv", "3,4,0\n");
    let out = cylfit(&[
        "eval",
        "--input",
        input.to_str().unwrap(),
        "--axis-point",
        "0,0,0",
        "--axis-dir",
        "0,0,1",
        "--radius",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["residuals"][0].as_f64().unwrap(), 2.0);
    assert_eq!(report["rms_distance"].as_f64().unwrap(), 2.0);
    // (5² − 3²)² = 256
    assert!((report["dbar2"].as_f64().unwrap() - 256.0).abs() < 1e-12);
    assert!((report["biquadratic_by_definition"].as_f64().unwrap() - 256.0).abs() < 1e-12);
}

#[test]
fn generate_is_deterministic_and_parseable() {
    let args = [
        "generate",
        "--n",
        "50",
        "--radius",
        "1",
        "--height",
        "2",
        "--axis-point",
        "0,0,0",
        "--axis-dir",
        "0,0,1",
        "--noise",
        "0.1",
        "--seed",
        "99",
    ];
    let first = cylfit(&args);
    let second = cylfit(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    let cloud = cylfit::parse_points_csv(&text).unwrap();
    assert_eq!(cloud.len(), 50);
}

#[test]
fn verify_agrees_with_grid() {
    let dir = TempDir::new().unwrap();
    let input = generated(&dir, "0.05", "5");
    let out = cylfit(&["verify", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(report["objective_gap"].as_f64().unwrap() <= 1e-9 * 6.0f64.powi(4));
    assert!(report["angle_deg"].as_f64().unwrap() < 2.0);
    assert_eq!(report["oracle"]["resolution"].as_u64().unwrap(), 10_000);
}

#[test]
fn degenerate_inputs_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("coincident", "1,1,1\n1,1,1\n1,1,1\n", "triple"),
        ("collinear", "0,0,0\n1,1,1\n2,2,2\n3,3,3\n", "double"),
        (
            "coplanar",
            "1,0,0\n-1,0,0\n0,1,0\n0,-1,0\n0.5,0.5,0\n",
            "simple",
        ),
    ];
    for (name, text, class) in cases {
        let input = write(dir.path(), &format!("{name}.csv"), text);
        let out = cylfit(&["fit", "--input", input.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let report = json(&out);
        assert_eq!(report["refused"], true);
        assert_eq!(report["degeneracy"], class, "{name}");
    }
    let input = dir.path().join("coplanar.csv");
    let out = cylfit(&["fit", "--input", input.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn bad_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "bad.csv", "1,2,3\n4,five,6\n");
    let out = cylfit(&["fit", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let missing = dir.path().join("missing.csv");
    let out = cylfit(&["fit", "--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(cylfit(&["fit"]).status.code(), Some(1));
    assert_eq!(cylfit(&["frobnicate"]).status.code(), Some(1));
    let out = cylfit(&["fit", "--input", "x.csv", "--grid", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn negative_radius_is_rejected() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "p.csv", "1,0,0\n");
    let out = cylfit(&[
        "eval",
        "--input",
        input.to_str().unwrap(),
        "--axis-point",
        "0,0,0",
        "--axis-dir",
        "0,0,1",
        "--radius",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
