use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ebin_core::field::{GridSpec, MetricField, MetricPath};
use ebin_core::spd::SymTensorPoint;
use serde_json::Value;

fn ebin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ebin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn check(doc: &Value, name: &str) -> Value {
    doc["summary"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .unwrap_or_else(|| panic!("no summary row {name}"))
        .clone()
}

fn dir_is_empty(p: &Path) -> bool {
    fs::read_dir(p).unwrap().next().is_none()
}

#[test]
fn eg2_csv_has_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eg2.csv");
    let o = ebin(&["run", "--preset", "eg2", "--grid", "4x4", "--r", "1", "--s", "2", "--t-max", "40", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(&out).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,speed,analytic_speed,speed_rel_err,length,analytic_length,length_rel_err,provenance"
    );
    assert_eq!(lines.count(), 400);
    assert!(table.lines().skip(1).all(|l| l.ends_with(",quadrature")));
    let summary = fs::read_to_string(dir.path().join("eg2.summary.csv")).unwrap();
    assert!(summary.starts_with("name,value,limit,pass,provenance\n"));
    assert!(summary.contains("max_speed_rel_err,"));
    assert!(!summary.contains(",false,"));
}

#[test]
fn eg2_json_speed_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eg2.json");
    let o = ebin(&["run", "--preset", "eg2", "--grid", "2x2", "--r", "2", "--s", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc = json(&out);
    assert_eq!(doc["pass"], true);
    assert!(check(&doc, "max_speed_rel_err")["value"].as_f64().unwrap() <= 1e-10);
    let c = 13f64.sqrt();
    let k = -0.25;
    let want = c * ((k * 40.0f64).exp() - k.exp()) / k;
    let got = check(&doc, "length_analytic")["value"].as_f64().unwrap();
    assert!((got - want).abs() <= 1e-12 * want);
}

#[test]
fn coarse_sampling_fails_the_length_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eg2.json");
    let o = ebin(&["run", "--preset", "eg2", "--grid", "2x2", "--samples", "21", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed: max_length_rel_err"));
    let doc = json(&out);
    assert_eq!(doc["pass"], false);
    assert_eq!(check(&doc, "max_length_rel_err")["pass"], false);
}

#[test]
fn tori_reports_volumes_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tori.json");
    let o = ebin(&["run", "--preset", "tori", "--grid", "8x8", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc = json(&out);
    assert_eq!(check(&doc, "vol_g0")["value"].as_f64().unwrap(), 0.01);
    assert_eq!(check(&doc, "vol_g1")["value"].as_f64().unwrap(), 0.01);
    let bound = check(&doc, "bound")["value"].as_f64().unwrap();
    assert!((bound - 0.565685424949238).abs() < 1e-12);
    let rows = doc["table"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r[6] == "sweep"));
}

#[test]
fn conformal_distance_is_two_root_two() {
    let o = ebin(&["run", "--preset", "conformal", "--grid", "8x8", "--rho0", "1", "--rho1", "4", "--triples", "20"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let d = check(&doc, "distance")["value"].as_f64().unwrap();
    assert!((d - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!(check(&doc, "radial_residual")["value"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn incompleteness_in_three_dimensions() {
    let o = ebin(&["run", "--preset", "incompleteness", "--grid", "3x3x3", "--beta", "0.5", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["dims"], serde_json::json!([3, 3, 3]));
}

#[test]
fn eg3_writes_zero_limit_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eg3.json");
    let field = dir.path().join("limit.mfield");
    let o = ebin(&["run", "--preset", "eg3", "--grid", "4x4", "--out", out.to_str().unwrap(), "--field-out", field.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let limit = ebin_core::io::read_field(&field).unwrap();
    assert_eq!(limit.max_abs(), 0.0);
    assert_eq!(check(&json(&out), "deflated_cells")["value"].as_f64().unwrap(), 16.0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["conformal", "incompleteness"] {
        let a = dir.path().join(format!("{preset}-a.json"));
        let b = dir.path().join(format!("{preset}-b.json"));
        for p in [&a, &b] {
            let o = ebin(&["run", "--preset", preset, "--grid", "6x6", "--seed", "11", "--out", p.to_str().unwrap()]);
            assert_eq!(code(&o), 0);
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
}

#[test]
fn seed_changes_randomized_output() {
    let run = |seed: &str| ebin(&["run", "--preset", "conformal", "--grid", "4x4", "--triples", "3", "--seed", seed]).stdout;
    assert_ne!(run("1"), run("2"));
}

#[test]
fn custom_bounds_between_field_files() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::unit_torus(2, vec![4, 4]).unwrap();
    let g0 = MetricField::identity(&grid);
    let g1 = MetricField::from_fn(&grid, |c| {
        if c[0] == 0 {
            SymTensorPoint::diag(&[2.0, 0.5]).unwrap()
        } else {
            SymTensorPoint::identity(2)
        }
    });
    let (p0, p1) = (dir.path().join("a.mfield"), dir.path().join("b.mfield"));
    ebin_core::io::write_field(&p0, &g0).unwrap();
    ebin_core::io::write_field(&p1, &g1).unwrap();
    let out = dir.path().join("custom.json");
    let o = ebin(&["run", "--preset", "custom", "--g0", p0.to_str().unwrap(), "--g1", p1.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&out);
    assert_eq!(doc["dims"], serde_json::json!([4, 4]));
    let rows = doc["table"]["rows"].as_array().unwrap();
    let get = |name: &str| rows.iter().find(|r| r[0] == name).unwrap()[1].as_f64().unwrap();
    assert!(get("distance_lower") <= get("distance_upper"));
    assert!(get("theta_lower") <= get("theta_upper"));
    assert!(get("distance_upper") <= get("straight_segment_length") + 1e-9);
}

#[test]
fn custom_path_length() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridSpec::unit_torus(1, vec![5]).unwrap();
    let times: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
    let fields = times
        .iter()
        .map(|t| MetricField::constant(&grid, SymTensorPoint::diag(&[(1.0 - 0.5 * t) * (1.0 - 0.5 * t)]).unwrap()))
        .collect();
    let path = MetricPath::new(times, fields).unwrap();
    let pp = dir.path().join("p.json");
    ebin_core::io::write_path(&pp, &path).unwrap();
    let o = ebin(&["run", "--preset", "custom", "--path", pp.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["pass"], true);
}

#[test]
fn usage_errors_exit_two_and_leave_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = out.to_str().unwrap();
    let missing = dir.path().join("missing.mfield");
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--preset", "eg2", "--bogus", "1", "--out", o],
        vec!["run", "--preset", "tori", "--r", "1", "--out", o],
        vec!["run", "--preset", "eg2", "--grid", "64by64", "--out", o],
        vec!["run", "--preset", "eg2", "--grid", "4x4x4", "--out", o],
        vec!["run", "--preset", "eg2", "--r", "-1", "--out", o],
        vec!["run", "--preset", "nope", "--out", o],
        vec!["run", "--preset", "custom", "--out", o],
        vec!["run", "--preset", "custom", "--g0", missing.to_str().unwrap(), "--g1", missing.to_str().unwrap(), "--out", o],
        vec!["run", "--preset", "eg2", "--format", "xml", "--out", o],
    ];
    for args in cases {
        let r = ebin(&args);
        assert_eq!(code(&r), 2, "{args:?}: {}", String::from_utf8_lossy(&r.stderr));
        assert!(!String::from_utf8_lossy(&r.stderr).is_empty());
        assert!(dir_is_empty(dir.path()), "{args:?} left files behind");
    }
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("no/such/dir/x.csv");
    let o = ebin(&["run", "--preset", "eg2", "--grid", "2x2", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(dir_is_empty(dir.path()));
}
