use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinsub")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_fixtures() {
    for f in ["vierdrachen.json", "triomino.json", "pp_factor.json", "c4.json", "rudin_shapiro.json", "gasket.json", "aba_bab.json"] {
        let o = run(&["validate", path(&fixture(f)), "--json"]);
        assert!(o.status.success(), "{f}: {}", stderr(&o));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["valid"], true);
    }
}

#[test]
fn coset_violation_exits_2() {
    let o = run(&["validate", path(&fixture("bad.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("`digits`") && err.contains("same coset"), "{err}");
}

#[test]
fn malformed_config_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, r#"{"m": 1, "Q": 2, "digits": [0, 1], "group_order": [2]}"#).unwrap();
    let o = run(&["validate", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("group_order"), "{}", stderr(&o));

    std::fs::write(&cfg, r#"{"m": 1, "Q": 2, "digits": [0, 1], "group_orders": [2], "W": [[0, 0], [0]]}"#).unwrap();
    let o = run(&["classify", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`W`"), "{}", stderr(&o));
}

#[test]
fn classify_vierdrachen() {
    let o = run(&["classify", path(&fixture("vierdrachen.json")), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let kinds: Vec<&str> = v["verdicts"].as_array().unwrap().iter().map(|x| x["verdict"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["pure-point-odometer", "lebesgue", "singular-continuous", "lebesgue"]);
}

#[test]
fn classify_needs_spins() {
    let o = run(&["classify", path(&fixture("gasket.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no group structure"));
}

#[test]
fn lyapunov_csv() {
    let o = run(&["lyapunov", path(&fixture("c4.json")), "--char", "1", "--N", "10..13", "--grid", "8192"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,f,2f,threshold,verdict");
    assert_eq!(lines.len(), 5);
    let two_f: f64 = lines[3].split(',').nth(2).unwrap().parse().unwrap();
    assert!((two_f - 0.688005).abs() < 5e-3, "{two_f}");
}

#[test]
fn factor_rules() {
    let o = run(&["factor", path(&fixture("pp_factor.json")), "--char", "2", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rules"], serde_json::json!(["a->aba", "b->bab"]));
    assert_eq!(v["periodicity"]["verdict"], "periodic-candidate");
}

#[test]
fn supertile_json() {
    let o = run(&["supertile", path(&fixture("rudin_shapiro.json")), "--level", "3", "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 8);
    assert_eq!(v["cells"][3]["position"], serde_json::json!([3]));
}

#[test]
fn render_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ppm");
    let b = dir.path().join("b.ppm");
    for p in [&a, &b] {
        let o = run(&["render", path(&fixture("triomino.json")), "--level", "4", "--out", path(p)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert!(bytes.starts_with(b"P6\n"));
    assert_eq!(bytes, std::fs::read(&b).unwrap());
}

#[test]
fn render_digit_tile_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tile.svg");
    let o = run(&["render", path(&fixture("vierdrachen.json")), "--tile", "--level", "14", "--out", path(&out), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["unit"], true);
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("<svg"));
}

#[test]
fn diffract_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["diffract", path(&fixture("rudin_shapiro.json")), "--char", "1", "--level", "10", "--out", path(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["autocorrelation.csv", "diffraction.csv", "diffraction.pgm", "diffraction.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn report_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["report", path(&fixture("vierdrachen.json")), "--out", path(dir.path()), "--grid", "64"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["system.json", "supertile.ppm", "tile.ppm", "classification.json", "classification.csv", "factors.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn level_cap_is_reported() {
    let o = run(&["supertile", path(&fixture("rudin_shapiro.json")), "--level", "40"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cap") || stderr(&o).contains("too large"), "{}", stderr(&o));
}
