use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vi-mirror"))
}

fn run_spec(spec: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg(spec)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv") && n != "summary.csv")
        .collect();
    names.sort();
    names
}

#[test]
fn mpm_example1_has_ten_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "s.toml",
        "iterations = 10\n[problem]\nkind = \"example1\"\n[[solver]]\nkind = \"mpm\"\n",
    );
    let out = tmp.path().join("out");
    let o = run_spec(&spec, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("01-mpm.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[0], "k,branch,gamma,residual,gap_sampled,bound_rhs");
    assert!(out.join("manifest.json").exists());
}

#[test]
fn hphard_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "s.toml",
        "[problem]\nkind = \"hphard\"\nn = 100\nseed = 7\nq_mode = \"zero\"\n[[solver]]\nkind = \"algorithm1\"\nm = 1\n[[solver]]\nkind = \"mpm\"\n",
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run_spec(&spec, &a, &[]).status.success());
    assert!(run_spec(&spec, &b, &[]).status.success());
    let files = csv_files(&a);
    assert_eq!(files.len(), 2);
    for f in files.iter().chain(std::iter::once(&"summary.csv".to_string())) {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn multi_curve_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "fig.toml",
        r#"
iterations = 100
[problem]
kind = "hphard"
n = 20
[[solver]]
kind = "algorithm1"
m = 1
[[solver]]
kind = "algorithm1"
m = 5
[[solver]]
kind = "algorithm1"
m = 50
[[solver]]
kind = "mpm"
"#,
    );
    let out = tmp.path().join("out");
    let o = run_spec(&spec, &out, &[]);
    assert!(o.status.success());
    assert_eq!(
        csv_files(&out),
        [
            "01-algorithm1-m1.csv",
            "02-algorithm1-m5.csv",
            "03-algorithm1-m50.csv",
            "04-mpm.csv"
        ]
    );
    let manifests = fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".json"))
        .count();
    assert_eq!(manifests, 1);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 5);
}

#[test]
fn invalid_spec_exits_2_without_files() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "bad.toml",
        "iterations = 5\n[problem]\nkind = \"example1\"\n[[solver]]\nkind = \"algorithm1\"\nm = -3\n[[solver]]\nkind = \"mpm\"\n",
    );
    let out = tmp.path().join("out");
    let o = run_spec(&spec, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(report["status"], "invalid");
    let fields: Vec<&str> = report["issues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["field"].as_str().unwrap())
        .collect();
    assert!(fields.contains(&"solver[0]"), "{fields:?}");
    assert!(!out.exists());

    let syntax = write(tmp.path(), "syntax.toml", "iterations = \n");
    let o = run_spec(&syntax, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn solver_failure_exits_3_and_other_solvers_run() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "s.toml",
        r#"
iterations = 1
[problem]
kind = "example1"
[[solver]]
kind = "algorithm2"
m = 0
epsilon = 0.01
[[solver.constraint]]
kind = "ball"
radius = 0.1
[[solver]]
kind = "mpm"
"#,
    );
    let out = tmp.path().join("out");
    let o = run_spec(&spec, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no productive steps"));
    assert_eq!(csv_files(&out), ["02-mpm.csv"]);
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"failed\""));
}

#[test]
fn flags_override_budget_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "s.toml",
        "iterations = 500\n[problem]\nkind = \"hphard\"\nn = 5\n[[solver]]\nkind = \"mpm\"\n",
    );
    let out = tmp.path().join("out");
    let o = run_spec(&spec, &out, &["--n", "7", "--seed", "3"]);
    assert!(o.status.success());
    let text = fs::read_to_string(out.join("01-mpm.csv")).unwrap();
    assert_eq!(text.lines().count(), 8);
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"iterations\": 7"));
    assert!(manifest.contains("\"seed\": 3"));
}

#[test]
fn generate_then_run_custom_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let problem = tmp.path().join("hp.json");
    let o = bin()
        .args([
            "generate", "hphard", "--n", "6", "--seed", "4", "--q-mode", "random", "--out",
        ])
        .arg(&problem)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&problem).unwrap();
    for key in ["\"n\"", "\"seed\"", "\"q\"", "\"K\"", "\"L_F\""] {
        assert!(text.contains(key), "{key}");
    }
    let spec = write(
        tmp.path(),
        "custom.toml",
        "iterations = 20\n[problem]\nkind = \"custom\"\npath = \"hp.json\"\n[[solver]]\nkind = \"algorithm1\"\nm = 1\n",
    );
    let out = tmp.path().join("out");
    let o = run_spec(&spec, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_files(&out), ["01-algorithm1-m1.csv"]);
}

#[test]
fn summary_reproduces_run_table() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write(
        tmp.path(),
        "s.toml",
        "iterations = 300\n[problem]\nkind = \"example2\"\n[[solver]]\nkind = \"algorithm1\"\nm = 1\n[[solver]]\nkind = \"mpm\"\n",
    );
    let out = tmp.path().join("out");
    let run = run_spec(&spec, &out, &[]);
    assert!(run.status.success());
    let summary = bin().arg("summary").arg(&out).output().unwrap();
    assert!(summary.status.success());
    assert_eq!(summary.stdout, run.stdout);
    let missing = bin().arg("summary").arg(tmp.path().join("nope")).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}
