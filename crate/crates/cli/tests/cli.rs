//! CLI behavior: exit codes, validation diagnostics, fixtures.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multifractal"))
}

fn write(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

const GOOD: &str = r#"
label = "ok"

[system]
kind = "sft"
full_shift = 2

[potential]
kind = "locally_constant"
values = [0.0, 1.0]

[analysis]
kind = "pressure"
q_min = -3.0
q_max = 3.0
q_step = 0.1
"#;

#[test]
fn analyze_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "good.toml", GOOD);
    let out = dir.path().join("artifacts");
    let status = bin().arg("analyze").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    for f in ["pressure.csv", "transitions.txt", "report.txt"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let pressure = std::fs::read_to_string(out.join("pressure.csv")).unwrap();
    assert!(pressure.starts_with("q,value,lo,hi,method\n"));
}

#[test]
fn malformed_toml_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[system\nkind = ");
    let output = bin().arg("analyze").arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("invalid config"), "{err}");
}

#[test]
fn semantic_error_exits_2_with_message() {
    let dir = tempfile::tempdir().unwrap();
    // dimension analysis on a bare subshift is a precondition violation
    let cfg = write(
        dir.path(),
        "dim-on-sft.toml",
        r#"
[system]
kind = "sft"
full_shift = 2

[potential]
kind = "locally_constant"
values = [0.0, 1.0]

[analysis]
kind = "dimension"
"#,
    );
    let output = bin().arg("analyze").arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("needs a map"), "{err}");
}

#[test]
fn validate_reports_stranded_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "stranded.toml",
        r#"
[system]
kind = "sft"
transition = [[0, 0], [1, 1]]

[potential]
kind = "locally_constant"
values = [0.0, 1.0]

[analysis]
kind = "pressure"
"#,
    );
    let output = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("row 0 has no successor"), "{err}");
}

#[test]
fn validate_accepts_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "good.toml", GOOD);
    let output = bin().arg("validate").arg(&cfg).output().unwrap();
    assert!(output.status.success());
    let out = String::from_utf8_lossy(&output.stdout);
    assert!(out.contains("config ok"), "{out}");
}

#[test]
fn budget_overrun_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "hungry.toml",
        r#"
[system]
kind = "sft"
full_shift = 2

[potential]
kind = "locally_constant"
values = [0.0, 1.0]

[analysis]
kind = "oracle-compare"
q_min = -3.0
q_max = 3.0
q_step = 0.1
n_list = [40]
"#,
    );
    let out = dir.path().join("o");
    let output =
        bin().arg("analyze").arg(&cfg).arg("--out").arg(&out).arg("--n-max").arg("1000").output().unwrap();
    assert_eq!(output.status.code(), Some(3), "{}", String::from_utf8_lossy(&output.stderr));
}

#[test]
fn singular_positive_q_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "singular.toml",
        r#"
[system]
kind = "sft"
full_shift = 2

[potential]
kind = "locally_constant"
values = [1.0, inf]

[analysis]
kind = "birkhoff"
q_min = -2.0
q_max = 2.0
q_step = 0.1
"#,
    );
    let out = dir.path().join("o");
    let output = bin().arg("analyze").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("q <= 0"), "{err}");
}

#[test]
fn fixtures_list_and_run() {
    let output = bin().arg("fixtures").arg("list").output().unwrap();
    assert!(output.status.success());
    let out = String::from_utf8_lossy(&output.stdout);
    assert!(out.contains("binary-entropy"), "{out}");

    let output = bin().arg("fixtures").arg("run").arg("binary-entropy").output().unwrap();
    assert!(output.status.success());
    let out = String::from_utf8_lossy(&output.stdout);
    assert!(out.contains("[PASS]"), "{out}");
    assert!(!out.contains("[FAIL]"), "{out}");

    let output = bin().arg("fixtures").arg("run").arg("nope").output().unwrap();
    assert!(!output.status.success());
}

#[test]
fn map_analysis_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "lyap.toml",
        r#"
[system]
kind = "map"
slopes = [2.0, 4.0]

[potential]
kind = "geometric"

[analysis]
kind = "lyapunov"
q_min = -20.0
q_max = 20.0
q_step = 0.05
"#,
    );
    let out = dir.path().join("o");
    let status = bin().arg("analyze").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    assert!(out.join("lyapunov.csv").exists());
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("bowen root"), "{report}");
}
