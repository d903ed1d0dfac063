use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use geom_core::connection::christoffel_at;
use geom_core::curvature::{ricci_at, riemann_at};
use geom_core::linalg::DEFAULT_DEGENERACY_TOL;
use geom_core::manifold::SpecDocument;
use geom_core::transport::{format_real, geodesic_shoot, parallel_transport, Curve, SolverConfig, Termination};
use geom_core::verify::{run_verify, VerifyConfig, DEFAULT_TOL, TOL_ENV};
use geom_core::{preset, GeomError, MetricSpec, Point, Tensor};
use serde_json::{json, Value};

use crate::args::{Quantity, SpecSource};
use crate::json;

/// Samples drawn by `info` when validating the chart.
pub const INFO_SAMPLES: usize = 100;
/// Step budget shared by the integrating commands.
pub const MAX_STEPS: usize = 100_000_000;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn failure(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        let code = match e {
            GeomError::Syntax { .. }
            | GeomError::UnknownIdentifier(_)
            | GeomError::Schema(_)
            | GeomError::UnknownPreset(_)
            | GeomError::DimensionMismatch { .. }
            | GeomError::InvalidArgument(_)
            | GeomError::OutOfInterval { .. } => 2,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Text written to standard output or to `--out`.
pub struct Output {
    pub text: String,
    pub code: i32,
}

fn parse_real(text: &str, what: &str) -> CliResult<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::input(format!("{what}: `{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::input(format!("{what}: `{text}` is not finite")));
    }
    Ok(v)
}

pub fn parse_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',').map(|s| parse_real(s, what)).collect()
}

fn check_finite(v: f64, what: &str) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::input(format!("{what} must be finite")))
    }
}

fn check_len(v: &[f64], spec: &MetricSpec, what: &str) -> CliResult<()> {
    if v.len() == spec.dim() {
        Ok(())
    } else {
        Err(CliError::input(format!(
            "{what} has {} components but the chart has dimension {}",
            v.len(),
            spec.dim()
        )))
    }
}

fn parse_point(spec: &MetricSpec, text: &str) -> CliResult<Point> {
    let x = parse_list(text, "--point")?;
    check_len(&x, spec, "--point")?;
    let p = Point::new(x);
    spec.check_point(&p).map_err(|e| CliError::input(e.to_string()))?;
    Ok(p)
}

pub fn load(source: &SpecSource) -> CliResult<MetricSpec> {
    let mut params = BTreeMap::new();
    for kv in &source.params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--param `{kv}` is not of the form name=value")))?;
        params.insert(k.trim().to_string(), parse_real(v, "--param")?);
    }
    if let Some(d) = source.dim {
        params.insert("dim".into(), d as f64);
    }
    if let Some(i) = source.index {
        params.insert("index".into(), i as f64);
    }
    match (&source.spec, &source.preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            let mut doc: SpecDocument =
                serde_json::from_str(&text).map_err(|e| CliError::from(GeomError::Schema(e.to_string())))?;
            doc.params.extend(params);
            Ok(doc.into_spec()?)
        }
        (None, Some(name)) => Ok(preset(name, &params)?),
        _ => Err(CliError::input("give exactly one of --spec and --preset")),
    }
}

fn bound(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format_real(v)
    }
}

pub fn info(spec: &MetricSpec) -> CliResult<Output> {
    let report = spec.validate(INFO_SAMPLES, 0, DEFAULT_DEGENERACY_TOL);
    let index = report.into_result()?;
    let mut text = String::new();
    let _ = writeln!(text, "name={}", spec.name());
    let _ = writeln!(text, "dim={} index={index}", spec.dim());
    let _ = writeln!(text, "coords={}", spec.coords().join(","));
    let d = spec.domain();
    for (i, c) in spec.coords().iter().enumerate() {
        let _ = writeln!(text, "domain {c} in ({}, {})", bound(d.lower[i]), bound(d.upper[i]));
    }
    for (k, v) in spec.params() {
        let _ = writeln!(text, "param {k}={}", format_real(*v));
    }
    Ok(Output { text, code: 0 })
}

fn nested(t: &Tensor) -> Value {
    fn rec(data: &[f64], dim: usize, rank: usize) -> Value {
        if rank == 0 {
            return json!(data[0]);
        }
        let stride = dim.pow(rank as u32 - 1);
        Value::Array((0..dim).map(|i| rec(&data[i * stride..(i + 1) * stride], dim, rank - 1)).collect())
    }
    rec(t.as_slice(), t.dim(), t.rank())
}

pub fn compute(spec: &MetricSpec, what: Quantity, point: &str, function: Option<&str>) -> CliResult<Output> {
    let p = parse_point(spec, point)?;
    let m = spec.dim();
    let mut out = json!({
        "coords": spec.coords(),
        "point": p.coords(),
    });
    let obj = out.as_object_mut().expect("object literal");
    match what {
        Quantity::Christoffel => {
            let g = christoffel_at(spec, &p)?;
            let t = Tensor::from_fn(m, 3, |ix| g.get(ix[0], ix[1], ix[2]));
            obj.insert("layout".into(), json!("christoffel[i][j][k] = Gamma^i_{jk}"));
            obj.insert("christoffel".into(), nested(&t));
        }
        Quantity::Riemann => {
            let r = riemann_at(spec, &p)?;
            obj.insert(
                "layout".into(),
                json!({
                    "mixed": "mixed[n][i][j][k] = dx^n(R(d_i, d_j) d_k)",
                    "lowered": "lowered[i][j][k][l] = <R(d_i, d_j) d_k, d_l>",
                }),
            );
            obj.insert("mixed".into(), nested(&r.mixed));
            obj.insert("lowered".into(), nested(&r.lowered));
        }
        Quantity::Ricci => {
            let r = ricci_at(spec, &p)?;
            let rows: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| r.ric.get(i, j)).collect()).collect();
            obj.insert("layout".into(), json!("ricci[j][k] = sum_i dx^i(R(d_i, d_j) d_k)"));
            obj.insert("ricci".into(), json!(rows));
            obj.insert("scalar".into(), json!(r.scalar));
        }
        Quantity::Scalar => {
            obj.insert("scalar".into(), json!(ricci_at(spec, &p)?.scalar));
        }
        Quantity::Grad => {
            let text = function.ok_or_else(|| CliError::input("compute grad needs --f"))?;
            let f = spec.parse_scalar(text)?;
            let g = spec.gradient_at(&f, &p)?;
            obj.insert("layout".into(), json!("grad[i] = sum_j g^{ij} d_j f"));
            obj.insert("grad".into(), json!(g.comp));
        }
    }
    Ok(Output { text: json::to_string(&out) + "\n", code: 0 })
}

pub fn geodesic(spec: &MetricSpec, point: &str, velocity: &str, t0: f64, t1: f64, dt: f64) -> CliResult<Output> {
    let p = parse_point(spec, point)?;
    let v = parse_list(velocity, "--velocity")?;
    check_len(&v, spec, "--velocity")?;
    check_finite(t0, "--t0")?;
    check_finite(t1, "--t1")?;
    let cfg = SolverConfig::new(dt, MAX_STEPS).map_err(|e| CliError::input(e.to_string()))?;
    let tr = geodesic_shoot(spec, &p, &v, (t0, t1), &cfg)?;
    let code = if tr.termination == Termination::MaxSteps { 1 } else { 0 };
    Ok(Output { text: tr.to_csv(), code })
}

pub fn transport(spec: &MetricSpec, curve: &str, vector: &str, t0: f64, t1: f64, dt: f64) -> CliResult<Output> {
    check_finite(t0, "--t0")?;
    check_finite(t1, "--t1")?;
    let texts: Vec<&str> = curve.split(';').map(str::trim).collect();
    if texts.len() != spec.dim() {
        return Err(CliError::input(format!(
            "--curve has {} components but the chart has dimension {}",
            texts.len(),
            spec.dim()
        )));
    }
    let v = parse_list(vector, "--vector")?;
    check_len(&v, spec, "--vector")?;
    let c = Curve::analytic(spec, &texts, t0.min(t1), t0.max(t1))?;
    let cfg = SolverConfig::new(dt, MAX_STEPS).map_err(|e| CliError::input(e.to_string()))?;
    let start = Point::new(c.state(t0)?.0);
    spec.check_point(&start).map_err(|e| CliError::input(e.to_string()))?;
    let w = parallel_transport(spec, &c, t0, t1, &v, &cfg)?;
    let end = Point::new(c.state(t1)?.0);
    let before = spec.metric_at(&start)?.bilinear(&v, &v);
    let after = spec.metric_at(&end)?.bilinear(&w, &w);
    let out = json!({
        "t0": t0,
        "t1": t1,
        "start": start.coords(),
        "end": end.coords(),
        "input": v,
        "output": w,
        "inner_before": before,
        "inner_after": after,
    });
    Ok(Output { text: json::to_string(&out) + "\n", code: 0 })
}

pub fn default_tol() -> CliResult<f64> {
    match std::env::var(TOL_ENV) {
        Ok(s) => {
            let t = parse_real(&s, TOL_ENV)?;
            if t < 0.0 {
                return Err(CliError::input(format!("{TOL_ENV} must be non-negative")));
            }
            Ok(t)
        }
        Err(_) => Ok(DEFAULT_TOL),
    }
}

pub fn verify(spec: &MetricSpec, samples: usize, seed: u64, tol: Option<f64>, dt: f64) -> CliResult<Output> {
    let tol = match tol {
        Some(t) if t.is_finite() && t >= 0.0 => t,
        Some(_) => return Err(CliError::input("--tol must be finite and non-negative")),
        None => default_tol()?,
    };
    if samples == 0 {
        return Err(CliError::input("--samples must be positive"));
    }
    SolverConfig::new(dt, MAX_STEPS).map_err(|e| CliError::input(e.to_string()))?;
    let cfg = VerifyConfig { samples, seed, tol, dt };
    let report = run_verify(spec, &cfg);
    let mut text = String::new();
    let _ = writeln!(
        text,
        "chart={} dim={} samples={samples} seed={seed} tol={} dt={}",
        spec.name(),
        spec.dim(),
        format_real(tol),
        format_real(dt)
    );
    let _ = writeln!(
        text,
        "{:<24} {:>7} {:>24} {:>24}  status",
        "check", "samples", "residual", "threshold"
    );
    for c in &report.checks {
        let status = match (c.passed, c.informational) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (true, true) => "INFO yes",
            (false, true) => "INFO no",
        };
        let _ = write!(
            text,
            "{:<24} {:>7} {:>24} {:>24}  {status}",
            c.name,
            c.samples,
            format_real(c.residual),
            format_real(c.threshold)
        );
        if !c.detail.is_empty() {
            let _ = write!(text, "  {}", c.detail);
        }
        text.push('\n');
    }
    let failing: Vec<&str> = report.failing().map(|c| c.name).collect();
    if failing.is_empty() {
        text.push_str("result=pass\n");
        Ok(Output { text, code: 0 })
    } else {
        let _ = writeln!(text, "result=fail failing={}", failing.join(","));
        Ok(Output { text, code: 1 })
    }
}

pub fn emit(out: &Output, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, &out.text).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::failure(format!("cannot write output: {e}")))
        }
    }
}
