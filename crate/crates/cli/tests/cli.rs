use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dir(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

/// Runs the binary with `config` written to a file in `d`.
fn run(d: &Path, cmd: &str, config: &str) -> Output {
    let path = d.join("run.cfg");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_halfstokes"))
        .arg(cmd)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(d.join("out"))
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn invalid_exponent_is_a_config_error_naming_the_field() {
    let o = run(&dir("bad_p"), "solve", "p = 1\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`p`") || stderr(&o).contains(" p "), "{}", stderr(&o));
}

#[test]
fn unknown_norm_kind_is_rejected() {
    let o = run(&dir("bad_norm"), "norms", "norms.kinds = sobolev\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("norms.kinds"));
}

#[test]
fn unknown_check_is_rejected() {
    let o = run(&dir("bad_check"), "verify", "verify.checks = nope\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("verify.checks"));
}

#[test]
fn empty_suite_passes_and_writes_a_summary() {
    let d = dir("empty");
    let o = run(&d, "verify", "verify.checks =\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = std::fs::read_to_string(d.join("out/verify_report.jsonl")).unwrap();
    assert!(report.lines().next().unwrap().starts_with("{\"header\""));
    assert!(report.contains("\"summary\""));
}

#[test]
fn zero_tolerance_fails_verification() {
    let o = run(&dir("zero_tol"), "verify", "verify.checks = kernel_homogeneity\nverify.homogeneity_tol = 0\n");
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn unit_lambda_gives_one_row_per_point() {
    let d = dir("table");
    let o = run(&d, "kernel-table", "kernel.lambda = 1\npoints = 0.3,-0.2,0.5,1\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(d.join("out/kernel_table.csv")).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    // column header plus one row
    assert_eq!(data.len(), 2, "{text}");
    assert!(text.contains("# config_sha256 "));
}

#[test]
fn solve_is_deterministic() {
    let cfg = "points.random = 3\nseed = 5\nsolve.residual_h = 0.02\n";
    let (a, b) = (dir("det_a"), dir("det_b"));
    for d in [&a, &b] {
        let o = run(d, "solve", cfg);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["samples.csv", "residuals.csv"] {
        let x = std::fs::read(a.join("out").join(f)).unwrap();
        let y = std::fs::read(b.join("out").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}
