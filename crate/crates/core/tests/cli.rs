use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn imbalab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imbalab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn generate(dir: &Path, out: &str) {
    let o = imbalab(
        dir,
        &["generate", "--ir", "10", "--sep", "1.0", "--clusters", "3", "--n", "1100", "--dim", "5", "--seed", "17", "--out", out],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn generate_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "d.csv");
    let csv = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "f0,f1,f2,f3,f4,label");
    assert_eq!(csv.lines().count(), 1101);
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("d.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["realized_ir"], 10.0);
    assert_eq!(meta["clusters"], 3);
    let sep = meta["realized_sep"].as_f64().unwrap();
    assert!((sep - 1.0).abs() <= 0.05);
    let mut names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names, ["d.csv", "d.meta.json"]);

    generate(dir.path(), "e.csv");
    assert_eq!(csv, fs::read_to_string(dir.path().join("e.csv")).unwrap());
}

#[test]
fn missing_input_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = imbalab(dir.path(), &["select", "missing.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(imbalab(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(imbalab(dir.path(), &["experiment", "--name", "b9"]).status.code(), Some(2));
    let o = imbalab(dir.path(), &["generate", "--ir", "10", "--sep", "9", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn degenerate_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("one.csv"), "f0,label\n1,0\n2,0\n3,0\n").unwrap();
    let o = imbalab(dir.path(), &["profile", "one.csv"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
}

#[test]
fn select_profile_resample_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "d.csv");

    let o = imbalab(dir.path(), &["select", "d.csv", "--seed", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["profile"]["separability"].is_number());
    assert!(v["branch"].is_string());
    assert!(["STRUCTURE_PRESERVING", "CLEANING", "BOUNDARY", "SIMPLE"].contains(&v["recommendation"].as_str().unwrap()));

    let o = imbalab(dir.path(), &["profile", "d.csv", "--out", "p.json"]);
    assert!(o.status.success() && o.stdout.is_empty());
    let p: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(p["ir"], 10.0);

    let o = imbalab(dir.path(), &["resample", "d.csv", "--method", "smote", "--seed", "1", "--out", "r.csv"]);
    assert!(o.status.success());
    let r = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(r.lines().filter(|l| l.ends_with(",1")).count(), 1000);

    let o = imbalab(dir.path(), &["--threads", "1", "evaluate", "d.csv", "--methods", "smote,tomek_links", "--learners", "tree"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let e: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(e["reports"].as_array().unwrap().len(), 3);
    assert_eq!(e["improvements"].as_array().unwrap().len(), 2 * 8);
}
