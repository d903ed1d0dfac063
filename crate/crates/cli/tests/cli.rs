use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn geom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geom"))
        .args(args)
        .env_remove("GEOM_DEFAULT_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("geom-cli-test-{}-{name}", std::process::id()))
}

#[test]
fn info_reports_dimension_and_index() {
    let o = geom(&["info", "--preset", "sphere", "--param", "r=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dim=2 index=0"));
    let o = geom(&["info", "--preset", "schwarzschild", "--param", "M=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("index=1"));
    let o = geom(&["info", "--preset", "semi_euclidean", "--dim", "5", "--index", "2"]);
    assert!(stdout(&o).contains("dim=5 index=2"));
}

#[test]
fn malformed_spec_file_is_an_input_error() {
    let path = temp_path("bad.json");
    std::fs::write(&path, "{\n  \"dim\": 2,\n  \"coords\": [\"x\", \n").unwrap();
    let o = geom(&["info", "--spec", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("schema error") && err.contains("line"), "{err}");
    std::fs::remove_file(path).ok();
}

#[test]
fn spec_file_with_degenerate_metric_fails_validation() {
    let path = temp_path("degenerate.json");
    std::fs::write(
        &path,
        r#"{"dim": 2, "coords": ["x", "y"], "domain": {"lower": [-1, -1], "upper": [1, 1]},
            "metric": [["x", "0"], ["0", "1"]]}"#,
    )
    .unwrap();
    let o = geom(&["info", "--spec", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    std::fs::remove_file(path).ok();
}

#[test]
fn spec_file_params_can_be_overridden() {
    let path = temp_path("sphere.json");
    std::fs::write(
        &path,
        r#"{"name": "round", "dim": 2, "coords": ["theta", "phi"],
            "domain": {"lower": [0.01, "-inf"], "upper": [3.13, "inf"]},
            "metric": [["r^2", "0"], ["0", "r^2*sin(theta)^2"]], "params": {"r": 1}}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let a = json(&geom(&["compute", "scalar", "--spec", p, "--point", "1.0,0.3"]));
    assert!((a["scalar"].as_f64().unwrap() - 2.0).abs() <= 1e-8);
    let b = json(&geom(&["compute", "scalar", "--spec", p, "--param", "r=2", "--point", "1.0,0.3"]));
    assert!((b["scalar"].as_f64().unwrap() - 0.5).abs() <= 1e-8);
    std::fs::remove_file(path).ok();
}

#[test]
fn compute_examples() {
    let o = geom(&["compute", "scalar", "--preset", "sphere", "--param", "r=1", "--point", "1.0,0.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((json(&o)["scalar"].as_f64().unwrap() - 2.0).abs() <= 1e-8);

    let o = geom(&["compute", "christoffel", "--preset", "semi_euclidean", "--dim", "3", "--index", "1", "--point", "0,0,0"]);
    let v = json(&o);
    let all: Vec<f64> = v["christoffel"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|a| a.as_array().unwrap().iter().flat_map(|b| floats(b)))
        .collect();
    assert_eq!(all.len(), 27);
    assert!(all.iter().all(|x| *x == 0.0));
    assert!(v["layout"].as_str().unwrap().contains("Gamma^i_{jk}"));

    let o = geom(&["compute", "grad", "--preset", "hyperbolic_halfplane", "--f", "x", "--point", "0,2"]);
    assert_eq!(floats(&json(&o)["grad"]), vec![4.0, 0.0]);
}

#[test]
fn compute_riemann_and_ricci_layouts() {
    let v = json(&geom(&["compute", "riemann", "--preset", "sphere", "--point", "0.8,0.1"]));
    let s2 = 0.8f64.sin().powi(2);
    let r0110 = v["lowered"][0][1][1][0].as_f64().unwrap();
    assert!((r0110 - s2).abs() <= 1e-14);
    assert!(v["layout"]["lowered"].is_string());
    let v = json(&geom(&["compute", "ricci", "--preset", "hyperbolic_halfplane", "--point", "0.3,2"]));
    assert!((v["scalar"].as_f64().unwrap() + 2.0).abs() <= 1e-12);
    assert!((v["ricci"][0][0].as_f64().unwrap() + 0.25).abs() <= 1e-14);
}

#[test]
fn floats_are_printed_with_seventeen_digits() {
    let o = geom(&["compute", "grad", "--preset", "hyperbolic_halfplane", "--f", "x", "--point", "0,2"]);
    assert!(stdout(&o).contains("4.0000000000000000e0"), "{}", stdout(&o));
}

#[test]
fn out_of_domain_point_is_an_input_error() {
    let o = geom(&["compute", "scalar", "--preset", "hyperbolic_halfplane", "--point", "0,-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("outside"));
}

#[test]
fn bad_inputs_never_panic() {
    let cases: &[&[&str]] = &[
        &["compute", "scalar", "--preset", "sphere", "--point", "1,2,3"],
        &["compute", "scalar", "--preset", "sphere", "--point", "a,b"],
        &["compute", "scalar", "--preset", "sphere", "--point", "nan,1"],
        &["compute", "grad", "--preset", "sphere", "--point", "1,0"],
        &["compute", "grad", "--preset", "sphere", "--point", "1,0", "--f", "sin("],
        &["compute", "grad", "--preset", "sphere", "--point", "1,0", "--f", "w"],
        &["info", "--preset", "torus"],
        &["info", "--preset", "sphere", "--param", "r"],
        &["info", "--preset", "sphere", "--param", "q=1"],
        &["info", "--preset", "semi_euclidean"],
        &["info", "--spec", "/nonexistent/file.json"],
        &["info", "--spec", "x.json", "--preset", "sphere"],
        &["geodesic", "--preset", "sphere", "--point", "1,0", "--velocity", "1", "--t1", "1"],
        &["geodesic", "--preset", "sphere", "--point", "1,0", "--velocity", "1,0", "--t1", "1", "--dt", "0"],
        &["transport", "--preset", "sphere", "--curve", "t", "--vector", "1,0", "--t1", "1"],
        &["transport", "--preset", "sphere", "--curve", "1;t", "--vector", "1,0", "--t1", "1", "--dt", "-1"],
        &["verify", "--preset", "sphere", "--samples", "0"],
        &["verify", "--preset", "sphere", "--tol", "-1"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = geom(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).contains("panicked"), "{args:?}");
    }
}

#[test]
fn geodesic_along_the_equator() {
    let o = geom(&["geodesic", "--preset", "sphere", "--point", "1.5707963267948966,0", "--velocity", "0,1", "--t1", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,v1,v2"));
    let mut rows = 0;
    for line in lines.clone().filter(|l| !l.starts_with('#')) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[2] - cols[0]).abs() <= 1e-9);
        rows += 1;
    }
    assert_eq!(rows, 10_001);
    assert_eq!(text.lines().last(), Some("# termination=completed"));
}

#[test]
fn radial_plunge_reports_domain_escape() {
    let o = geom(&[
        "geodesic", "--preset", "schwarzschild", "--param", "M=1", "--point", "0,10,1.5707963267948966,0",
        "--velocity", "1.2,-0.5,0,0", "--t1", "200",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().last().unwrap().starts_with("# termination=domain_escape t_exit="));
    for line in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let r: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(r > 2.1);
    }
}

#[test]
fn geodesic_writes_to_file() {
    let path = temp_path("line.csv");
    let o = geom(&[
        "geodesic", "--preset", "semi_euclidean", "--dim", "2", "--point", "1,2", "--velocity", "0.5,-1",
        "--t1", "2", "--dt", "0.5", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let last: Vec<f64> = text.lines().nth(5).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(last, vec![2.0, 2.0, 0.0, 0.5, -1.0]);
    std::fs::remove_file(path).ok();
}

#[test]
fn transport_examples() {
    let o = geom(&[
        "transport", "--preset", "sphere", "--param", "r=1", "--curve", "pi/3; t", "--vector", "1,0",
        "--t1", "6.283185307179586", "--dt", "1e-4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let out = floats(&v["output"]);
    assert!((out[0] + 1.0).abs() <= 1e-5 && out[1].abs() <= 1e-5, "{out:?}");
    assert!((v["inner_before"].as_f64().unwrap() - v["inner_after"].as_f64().unwrap()).abs() <= 1e-9);

    let v = json(&geom(&[
        "transport", "--preset", "semi_euclidean", "--dim", "2", "--index", "1", "--curve", "t^2; sin(t)",
        "--vector", "0.3,-0.7", "--t1", "2",
    ]));
    assert_eq!(floats(&v["output"]), vec![0.3, -0.7]);

    let v = json(&geom(&["transport", "--preset", "sphere", "--curve", "1; t", "--vector", "0.1,0.2", "--t0", "1", "--t1", "1"]));
    assert_eq!(floats(&v["output"]), vec![0.1, 0.2]);
}

#[test]
fn transport_leaving_the_chart_is_a_numerical_failure() {
    let o = geom(&["transport", "--preset", "hyperbolic_halfplane", "--curve", "t; 1 - t", "--vector", "1,0", "--t1", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("outside"));
}

#[test]
fn verify_flat_space_is_clean() {
    let o = geom(&["verify", "--preset", "semi_euclidean", "--dim", "4", "--index", "1", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for line in text.lines().skip(2).filter(|l| l.contains("PASS")) {
        let residual: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
        assert!(residual <= 1e-10, "{line}");
    }
    assert!(text.ends_with("result=pass\n"));
}

#[test]
fn zero_tolerance_names_the_failing_checks() {
    let o = geom(&["verify", "--preset", "sphere", "--samples", "5", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let last = stdout(&o).lines().last().unwrap().to_string();
    assert!(last.starts_with("result=fail failing="), "{last}");
    assert!(last.contains("holonomy_convergence"), "{last}");
}

#[test]
fn tolerance_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_geom"))
        .args(["verify", "--preset", "sphere", "--samples", "5"])
        .env("GEOM_DEFAULT_TOL", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_geom"))
        .args(["verify", "--preset", "sphere", "--samples", "5"])
        .env("GEOM_DEFAULT_TOL", "bogus")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_is_deterministic_and_seed_dependent() {
    let a = geom(&["verify", "--preset", "hyperbolic_halfplane", "--samples", "8", "--seed", "3"]);
    let b = geom(&["verify", "--preset", "hyperbolic_halfplane", "--samples", "8", "--seed", "3"]);
    let c = geom(&["verify", "--preset", "hyperbolic_halfplane", "--samples", "8", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn help_exits_cleanly() {
    let o = geom(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verify"));
}
