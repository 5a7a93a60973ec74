use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gauge_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gauge-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn version_prints_package_version() {
    let o = gauge_lab(&["version"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), format!("gauge-lab {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn classify_prints_json() {
    let o = gauge_lab(&["classify", "--chi", "k*t^2", "--const", "k=0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["class"], "DifferencePreserving");

    let o = gauge_lab(&["classify", "--chi", "x*t"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["class"], "General");
}

#[test]
fn classify_reports_bad_input_with_exit_2() {
    let o = gauge_lab(&["classify", "--chi", "x +"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));

    let o = gauge_lab(&["classify", "--chi", "x", "--const", "k"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_passing_config_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = configs().join("classify.toml");
    let o = gauge_lab(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("PASS"));
    assert!(!stdout(&o).contains("FAIL"));
    assert!(out.join("classify.json").exists());
}

#[test]
fn failed_assertion_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "wrong.toml",
        "experiment = \"classify\"\nchis = [\"x*t\"]\nexpected = [\"Invariant\"]\n",
    );
    let o = gauge_lab(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn undefined_constant_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "experiment = \"cross-gauge\"\nchi = \"q*t^2\"\n");
    let o = gauge_lab(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("undefined constant `q`"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_missing_file_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "typo.toml", "experiment = \"classify\"\nchiz = [\"x\"]\n");
    assert_eq!(gauge_lab(&["run", &cfg]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(gauge_lab(&["run", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("classify.toml");
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = gauge_lab(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        outputs.push(fs::read(out.join("classify.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn csv_and_text_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("covariance.toml");
    let o = gauge_lab(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csvs: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    assert!(csvs.len() >= 2, "{csvs:?}");

    let o = gauge_lab(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--format", "text"]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("covariance.txt")).unwrap();
    assert!(text.contains("covariance"));
}
