use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const DISK: &str = r#"
[domain]
kind = "disk"
radius = 1.0

[vortices]
p = [0.0, 0.0]
lambda = [1.0, 1.0]
eps = 1e-3

[mfs]
n_sources_outer = 96
n_collocation = 192

[green]
trials = 3
nodes = 1024
pairs = 40
"#;

fn krcrit(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krcrit")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn setup() -> (tempfile::TempDir, String) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("disk.toml");
    fs::write(&cfg, DISK).unwrap();
    (dir, cfg.to_string_lossy().into_owned())
}

#[test]
fn missing_config_exits_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = krcrit(&["find", "--config", "no_such_file.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_file.toml"));
}

#[test]
fn malformed_config_exits_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[domain]\nkind = \"square\"\n").unwrap();
    let o = krcrit(&["find", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn green_check_passes_on_the_disk_and_dumps_json() {
    let (dir, cfg) = setup();
    let dump = dir.path().join("model.json");
    let o = krcrit(&["green-check", "--config", &cfg, "--dump-green", dump.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("green_check.json")).unwrap()).unwrap();
    assert_eq!(rep["pass"], true);
    assert!(rep["reference_error"].as_f64().unwrap() < 1e-6);
    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(model["outer"]["n_sources"], 96);
    assert_eq!(model["source_points"].as_array().unwrap().len(), 96);
}

#[test]
fn find_on_the_annulus_reports_one_pair() {
    let (dir, cfg) = setup();
    let o = krcrit(&["find", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("critical_points.json")).unwrap()).unwrap();
    assert_eq!(v["count"], 1);
    assert_eq!(v["nontrivially_different"], 1);
    let p = &v["points"][0];
    let r = p["x"]["x1"].as_f64().unwrap().hypot(p["x"]["x2"].as_f64().unwrap());
    assert!((r - 0.1766).abs() < 1e-3, "radius {r}");
}

#[test]
fn find_is_deterministic_and_csv_matches_json() {
    let (dir, cfg) = setup();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(krcrit(&["find", "--config", &cfg], &a).status.success());
    assert!(krcrit(&["find", "--config", &cfg], &b).status.success());
    assert_eq!(fs::read(a.join("critical_points.json")).unwrap(), fs::read(b.join("critical_points.json")).unwrap());
    assert!(krcrit(&["find", "--config", &cfg, "--format", "csv", "--plot"], &a).status.success());
    let csv = fs::read_to_string(a.join("critical_points.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("source,eps,index,x1,x2,y1,y2,type"));
    assert!(fs::read_to_string(a.join("locations.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn disk_type2_lists_the_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let o = krcrit(&["disk-type2", "--s", "0.9,0.97"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("disk_type2.json")).unwrap()).unwrap();
    let d1 = v["thresholds"]["d1"].as_f64().unwrap();
    assert!((d1 - 0.0814).abs() < 1e-3);
    assert_eq!(v["rows"][0]["zeros"].as_array().unwrap().len(), 0);
    assert_eq!(v["rows"][1]["zeros"].as_array().unwrap().len(), 2);
}

#[test]
fn report_merges_outputs() {
    let (dir, cfg) = setup();
    assert!(krcrit(&["find", "--config", &cfg], dir.path()).status.success());
    let input = dir.path().join("critical_points.json");
    let o = krcrit(&["report", input.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{}").unwrap();
    assert_eq!(krcrit(&["report", bad.to_str().unwrap()], dir.path()).status.code(), Some(2));
}
