use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    crate_dir().join("fixtures").join(name).display().to_string()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_simplexvol"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run_ok(args: &[&str]) -> Value {
    let r = run(args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn check_schema(name: &str, instance: &Value) {
    let path = crate_dir().join("../../docs/schemas").join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    if let Err(e) = validator.validate(instance) {
        panic!("{name}: {e}");
    }
}

fn write_temp(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn classify_documents() {
    let out = run_ok(&["classify", &fixture("identity_gram_4.json")]);
    assert_eq!(out["tag"], "Spherical");
    check_schema("classify.schema.json", &out);
    let out = run_ok(&["classify", &fixture("pi6_triangle_angles.json")]);
    assert_eq!(out["tag"], "Hyperbolic");
    assert!(f(&out["det"]) < 0.0);
    assert_eq!(out["minor_positive_definite"], serde_json::json!([true, true, true]));
    check_schema("classify.schema.json", &out);
}

#[test]
fn asymmetric_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(
        dir.path(),
        "a.json",
        r#"{"kind":"angle_gram","n":2,"data":[[1,0.1,0],[0.2,1,0],[0,0,1]]}"#,
    );
    let r = run(&["classify", &p]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("symmetry violation at (0,1)"), "{}", r.stderr);
    let bad = write_temp(dir.path(), "b.json", "{not json");
    assert_eq!(run(&["classify", &bad]).code, 2);
    assert_eq!(run(&["classify", "/nonexistent/file.json"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
}

#[test]
fn volume_of_identity_and_pi6_triangle() {
    let out = run_ok(&["volume", &fixture("identity_gram_3.json"), "--samples", "100000"]);
    check_schema("volume.schema.json", &out);
    let (v, se) = (f(&out["value"]), f(&out["std_error"]));
    assert!((v - PI / 2.0).abs() <= 3.0 * se + 1e-12);
    assert_eq!(out["method"], "OrthantMC");

    for args in [
        vec!["volume", "--samples", "200000"],
        vec!["volume", "--samples", "200000", "--method", "cone"],
    ] {
        let mut a = args.clone();
        let p = fixture("pi6_triangle_angles.json");
        a.insert(1, &p);
        let out = run_ok(&a);
        check_schema("volume.schema.json", &out);
        let (v, se) = (f(&out["value"]), f(&out["std_error"]));
        assert!((v - PI / 2.0).abs() <= 3.0 * se, "{out}");
    }
    let out = run_ok(&["volume", &fixture("pi6_triangle_gram.json"), "--method", "gauss_bonnet"]);
    assert!((f(&out["value"]) - PI / 2.0).abs() < 1e-14);
}

#[test]
fn volume_errors() {
    let r = run(&["volume", &fixture("identity_gram_3.json"), "--samples", "0"]);
    assert_eq!(r.code, 2);
    let dir = tempfile::tempdir().unwrap();
    let euclid = write_temp(
        dir.path(),
        "e.json",
        r#"{"kind":"angle_matrix","n":2,"data":[["3.141592653589793","1.5707963267948966","0.7853981633974483"],["1.5707963267948966","3.141592653589793","0.7853981633974483"],["0.7853981633974483","0.7853981633974483","3.141592653589793"]]}"#,
    );
    let r = run(&["volume", &euclid]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("boundary matrix: use `degenerate` to approach it"), "{}", r.stderr);
    let r = run(&["volume", &fixture("identity_gram_3.json"), "--method", "cone"]);
    assert_eq!(r.code, 2);
    let r = run(&["volume", &fixture("identity_gram_3.json"), "--format", "csv"]);
    assert_eq!(r.code, 2);
}

#[test]
fn degrees_flag() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(
        dir.path(),
        "deg.json",
        r#"{"kind":"angle_matrix","n":2,"data":[[180,30,30],[30,180,30],[30,30,180]]}"#,
    );
    assert_eq!(run_ok(&["classify", &p, "--degrees"])["tag"], "Hyperbolic");
    assert_eq!(run(&["classify", &p]).code, 2);
}

#[test]
fn conversions() {
    let dir = tempfile::tempdir().unwrap();
    let right = write_temp(
        dir.path(),
        "right.json",
        r#"{"kind":"angle_matrix","n":2,"data":[["3.141592653589793","1.5707963267948966","1.5707963267948966"],["1.5707963267948966","3.141592653589793","1.5707963267948966"],["1.5707963267948966","1.5707963267948966","3.141592653589793"]]}"#,
    );
    let out = run_ok(&["convert", &right, "--to", "angle_gram"]);
    check_schema("convert.schema.json", &out);
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((f(&out["data"][i][j]) - expected).abs() < 1e-15);
        }
    }

    // equilateral hyperbolic triangle: vertices, then distances
    let verts = run_ok(&["convert", &fixture("pi6_triangle_angles.json"), "--to", "vertices"]);
    check_schema("convert.schema.json", &verts);
    assert_eq!(verts["geometry"], "Hyperbolic");
    let vpath = write_temp(dir.path(), "v.json", &verts.to_string());
    let dist = run_ok(&["convert", &vpath, "--to", "distance_gram"]);
    let c = f(&dist["data"][0][1]);
    for (i, j) in [(0, 2), (1, 2)] {
        assert!((f(&dist["data"][i][j]) - c).abs() < 1e-12 * c);
    }

    // angle Gram → vertices → angle Gram
    let gram = run_ok(&["convert", &vpath, "--to", "angle_gram"]);
    let original = run_ok(&["convert", &fixture("pi6_triangle_angles.json"), "--to", "angle_gram"]);
    for i in 0..3 {
        for j in 0..3 {
            assert!((f(&gram["data"][i][j]) - f(&original["data"][i][j])).abs() <= 1e-8);
        }
    }
    let gpath = write_temp(dir.path(), "g.json", &original.to_string());
    let back = run_ok(&["convert", &gpath, "--to", "angle_matrix"]);
    assert!((f(&back["data"][0][1]) - PI / 6.0).abs() < 1e-12);

    let r = run(&["convert", &vpath, "--to", "angle_matrix"]);
    assert_eq!(r.code, 2);
}

#[test]
fn inball_of_pi6_triangle() {
    let out = run_ok(&["inball", &fixture("pi6_triangle_gram.json")]);
    check_schema("inball.schema.json", &out);
    let c: Vec<f64> = out["center"].as_array().unwrap().iter().map(f).collect();
    let form = c[0] * c[0] + c[1] * c[1] - c[2] * c[2];
    assert!((form + 1.0).abs() < 1e-12);
    let r = f(&out["radius"]);
    // equilateral: tanh r = √(sinh(s−a)³/sinh s), s = 3a/2, cosh a = 1 + 2√3 + ...
    let side = ((0.75f64).sqrt() * (0.75f64).sqrt() + 0.75f64.sqrt()) / (0.25f64);
    let a = side.acosh();
    let s = 1.5 * a;
    let expected = ((s - a).sinh().powi(3) / s.sinh()).sqrt().atanh();
    assert!((r - expected).abs() < 1e-10, "{r} vs {expected}");
    assert!(f(&out["equidistance_residual"]) < 1e-10);
    let r = run(&["inball", &fixture("identity_gram_3.json")]);
    assert_eq!(r.code, 3);
}

#[test]
fn degenerate_lune_config() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("lune.csv");
    let out = run_ok(&["degenerate", &fixture("lune_path.json"), "--csv", csv.to_str().unwrap()]);
    check_schema("degenerate.schema.json", &out);
    assert_eq!(out["summary"]["verdict"], "pass");
    let last = &out["summary"]["limit_estimate"];
    assert!((f(&last["value"]) - 2.0).abs() <= 3.0 * f(&last["std_error"]), "{last}");
    assert_eq!(out["manifest"]["samples"], 200000);
    assert_eq!(out["manifest"]["seed"], 2024);

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,volume,std_error,succ_diff,lambda_min,det,min_adjugate"
    );
    assert_eq!(lines.count(), 24);
    let side = dir.path().join("lune.csv.manifest.json");
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
    assert_eq!(manifest["command"], "degenerate");
}

#[test]
fn degenerate_euclidean_limit_config() {
    let out = run_ok(&["degenerate", &fixture("euclidean_limit_triangle.json")]);
    assert_eq!(out["summary"]["verdict"], "pass");
    let steps = out["steps"].as_array().unwrap();
    let first = f(&steps[0]["volume"]["value"]);
    let last = f(&steps[steps.len() - 1]["volume"]["value"]);
    assert!((first - PI / 2.0).abs() < 0.01);
    assert!(last < 1e-3);
    assert_eq!(f(&out["expected_limit"]), 0.0);
}

#[test]
fn degenerate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let nonmonotone = write_temp(
        dir.path(),
        "n.json",
        r#"{"path":{"family":"lune","alpha":1.0},"schedule":[0.1,0.5,0.3],"samples":1000}"#,
    );
    assert_eq!(run(&["degenerate", &nonmonotone]).code, 2);
    let exits = write_temp(
        dir.path(),
        "x.json",
        r#"{"path":{"a0":[[1,0,0],[0,1,0],[0,0,1]],"a1":[[1,-2,0],[-2,1,0],[0,0,1]]},"schedule":[0.1,0.3,0.6],"samples":1000}"#,
    );
    let r = run(&["degenerate", &exits]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("t = 0.6"), "{}", r.stderr);
    let unknown = write_temp(dir.path(), "u.json", r#"{"path":{"family":"lune","alpha":1.0},"stepz":3}"#);
    assert_eq!(run(&["degenerate", &unknown]).code, 2);
}

#[test]
fn degenerate_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_temp(
        dir.path(),
        "c.json",
        r#"{"path":{"family":"lune","alpha":0.5},"steps":6,"samples":2000}"#,
    );
    let r = run(&["degenerate", &cfg, "--format", "csv"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines.len(), 7);
    // first row has no successive difference
    assert_eq!(lines[1].split(',').nth(3), Some(""));
}

#[test]
fn tail_rows_are_nonincreasing() {
    let r = run(&["tail", &fixture("pi6_triangle_gram.json"), "--samples", "50000"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut rdr = csv::Reader::from_reader(r.stdout.as_bytes());
    let rows: Vec<(f64, f64, f64)> = rdr.deserialize().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 9);
    for w in rows.windows(2) {
        assert!(w[1].1 <= w[0].1);
    }
    assert_eq!(rows.last().unwrap().1, 0.0);

    let out = run_ok(&[
        "tail",
        &fixture("pi6_triangle_gram.json"),
        "--samples",
        "20000",
        "--format",
        "json",
        "--radii",
        "0,0.5,1",
    ]);
    check_schema("tail.schema.json", &out);
    assert!(f(&out["min_face_distance"]) > 0.0);

    // a point outside the simplex still runs, with a warning
    let r = run(&[
        "tail",
        &fixture("pi6_triangle_gram.json"),
        "--samples",
        "1000",
        "--point",
        "3,0,3.1622776601683795",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("warning"));
}

fn strip_timestamp(mut v: Value) -> Value {
    v["manifest"]["timestamp"] = Value::Null;
    v
}

#[test]
fn reruns_are_identical_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let r = run(&[
            "volume",
            &fixture("pi6_triangle_angles.json"),
            "--samples",
            "50000",
            "--seed",
            "99",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert_eq!(r.code, 0, "{}", r.stderr);
    }
    let va: Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    let vb: Value = serde_json::from_str(&std::fs::read_to_string(&b).unwrap()).unwrap();
    assert_eq!(strip_timestamp(va.clone()), strip_timestamp(vb));
    let other = run_ok(&["volume", &fixture("pi6_triangle_angles.json"), "--samples", "50000", "--seed", "100"]);
    assert_ne!(va["value"], other["value"]);
}

#[test]
fn fixtures_match_schemas() {
    for name in [
        "identity_gram_2.json",
        "identity_gram_3.json",
        "identity_gram_4.json",
        "pi6_triangle_angles.json",
        "pi6_triangle_gram.json",
    ] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        check_schema("matrix_document.schema.json", &v);
    }
    for name in ["lune_path.json", "euclidean_limit_triangle.json", "near_ideal_tetrahedron.json"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        check_schema("degenerate_config.schema.json", &v);
    }
}
