use std::path::PathBuf;
use std::process::Command;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn cylfit(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_cylfit"))
        .args(args)
        .output()
        .expect("cylfit binary runs");
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn generator_output_is_stable() {
    let out = cylfit(&[
        "generate",
        "--n",
        "24",
        "--radius",
        "1.5",
        "--height",
        "4",
        "--axis-point",
        "0.5,-1,2",
        "--axis-dir",
        "1,1,2",
        "--noise",
        "0.01",
        "--seed",
        "42",
    ]);
    let expected = std::fs::read(golden("cylinder_seed42.csv")).unwrap();
    assert!(
        out == expected,
        "generated CSV differs from the golden file"
    );
}

#[test]
fn fit_report_is_stable() {
    let input = golden("cylinder_seed42.csv");
    for extra in [None, Some("--sequential")] {
        let mut args = vec![
            "fit",
            "--input",
            input.to_str().unwrap(),
            "--grid",
            "500",
            "--multistart",
            "4",
            "--residuals",
        ];
        args.extend(extra);
        let out = cylfit(&args);
        let expected = std::fs::read(golden("cylinder_seed42.fit.json")).unwrap();
        assert!(
            out == expected,
            "fit report differs from the golden file:\n{}",
            String::from_utf8_lossy(&out)
        );
    }
}
