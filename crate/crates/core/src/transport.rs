//! Curves, covariant derivatives along them, parallel transport and
//! geodesics.
//!
//! All integrations use classical fourth-order Runge-Kutta with equal steps:
//! `[t0, t1]` is split into `n = ceil(|t1 - t0| / dt)` steps of size
//! `(t1 - t0) / n`, so `t1 < t0` integrates backwards and the last step lands
//! on `t1` exactly.

use std::fmt;
use std::io::{self, Write};

use crate::connection::{christoffel_at, ChristoffelAt};
use crate::error::{GeomError, Result};
use crate::expr::{Dual2, Expr};
use crate::linalg;
use crate::manifold::{MetricSpec, Point, TangentVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            max_steps: 10_000_000,
        }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, max_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(GeomError::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if max_steps == 0 {
            return Err(GeomError::InvalidArgument("max_steps must be positive".into()));
        }
        Ok(SolverConfig { dt, max_steps })
    }

    /// Step count and signed step size covering `[t0, t1]`.
    pub fn plan(&self, t0: f64, t1: f64) -> Result<(usize, f64)> {
        if !(t0.is_finite() && t1.is_finite()) {
            return Err(GeomError::InvalidArgument(format!(
                "interval [{t0}, {t1}] is not finite"
            )));
        }
        if t0 == t1 {
            return Ok((0, 0.0));
        }
        let needed = ((t1 - t0).abs() / self.dt).ceil().max(1.0);
        if needed > self.max_steps as f64 {
            return Err(GeomError::MaxSteps {
                needed: needed.min(usize::MAX as f64) as usize,
                max_steps: self.max_steps,
            });
        }
        let n = needed as usize;
        Ok((n, (t1 - t0) / n as f64))
    }
}

fn step_time(t0: f64, t1: f64, h: f64, n: usize, k: usize) -> f64 {
    if k == n {
        t1
    } else {
        t0 + k as f64 * h
    }
}

/// Component expressions over a few leading real variables (`t` for curves,
/// `s, t` for families) followed by the chart parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamExprs {
    comps: Vec<Expr>,
    n_lead: usize,
    params: Vec<f64>,
}

impl ParamExprs {
    pub fn parse(spec: &MetricSpec, texts: &[&str], leading: &[&str]) -> Result<Self> {
        if texts.len() != spec.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: spec.dim(),
                found: texts.len(),
            });
        }
        let comps = texts
            .iter()
            .map(|t| spec.parse_with_leading(t, leading))
            .collect::<Result<_>>()?;
        Ok(ParamExprs {
            comps,
            n_lead: leading.len(),
            params: spec.params().iter().map(|p| p.1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    fn slots(&self, lead: &[f64]) -> Vec<f64> {
        debug_assert_eq!(lead.len(), self.n_lead);
        lead.iter().chain(&self.params).copied().collect()
    }

    pub fn value(&self, lead: &[f64]) -> Result<Vec<f64>> {
        let vals = self.slots(lead);
        self.comps.iter().map(|e| e.eval_slots_real(&vals)).collect()
    }

    /// Values and partials `d[i][a] = ∂ comp_i / ∂ lead_a`.
    pub fn jet1(&self, lead: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let vals = self.slots(lead);
        let mut value = Vec::with_capacity(self.len());
        let mut d = Vec::with_capacity(self.len());
        for e in &self.comps {
            let x = e.eval_slots_dual1(&vals, self.n_lead)?;
            value.push(x.value);
            d.push(x.grad);
        }
        Ok((value, d))
    }

    pub fn jet2(&self, lead: &[f64]) -> Result<Vec<Dual2>> {
        let vals = self.slots(lead);
        self.comps
            .iter()
            .map(|e| e.eval_slots_dual2(&vals, self.n_lead))
            .collect()
    }
}

/// A curve given by expressions in which one leading variable runs over
/// `[lo, hi]` and any others stay fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCurve {
    exprs: ParamExprs,
    lead: Vec<f64>,
    free: usize,
    lo: f64,
    hi: f64,
}

/// A curve known through samples `(t, x, v)`, interpolated by cubic Hermite
/// polynomials. Times are stored increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    t: Vec<f64>,
    x: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    Analytic(AnalyticCurve),
    Sampled(SampledCurve),
}

impl Curve {
    /// Curve `t ↦ (e_1(t), .., e_m(t))` on `[lo, hi]`.
    pub fn analytic(spec: &MetricSpec, texts: &[&str], lo: f64, hi: f64) -> Result<Self> {
        let exprs = ParamExprs::parse(spec, texts, &["t"])?;
        Self::from_exprs(exprs, vec![0.0], 0, lo, hi)
    }

    fn from_exprs(exprs: ParamExprs, lead: Vec<f64>, free: usize, lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(GeomError::InvalidArgument(format!(
                "curve interval [{lo}, {hi}] is empty"
            )));
        }
        Ok(Curve::Analytic(AnalyticCurve {
            exprs,
            lead,
            free,
            lo,
            hi,
        }))
    }

    /// Hermite interpolant through the samples of an integrated trajectory.
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        if traj.samples.len() < 2 {
            return Err(GeomError::InvalidArgument(
                "a sampled curve needs at least two samples".into(),
            ));
        }
        let mut samples: Vec<&Sample> = traj.samples.iter().collect();
        if samples[0].t > samples[samples.len() - 1].t {
            samples.reverse();
        }
        if samples.windows(2).any(|w| !(w[0].t < w[1].t)) {
            return Err(GeomError::InvalidArgument(
                "sample times must be strictly monotone".into(),
            ));
        }
        Ok(Curve::Sampled(SampledCurve {
            t: samples.iter().map(|s| s.t).collect(),
            x: samples.iter().map(|s| s.x.clone()).collect(),
            v: samples.iter().map(|s| s.v.clone()).collect(),
        }))
    }

    pub fn interval(&self) -> (f64, f64) {
        match self {
            Curve::Analytic(c) => (c.lo, c.hi),
            Curve::Sampled(c) => (c.t[0], c.t[c.t.len() - 1]),
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.interval();
        if lo <= t && t <= hi {
            Ok(())
        } else {
            Err(GeomError::OutOfInterval { t, lo, hi })
        }
    }

    /// Coordinates and velocity at `t`, without a domain check.
    pub fn state(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_time(t)?;
        match self {
            Curve::Analytic(c) => {
                let mut lead = c.lead.clone();
                lead[c.free] = t;
                let (x, d) = c.exprs.jet1(&lead)?;
                Ok((x, d.iter().map(|row| row[c.free]).collect()))
            }
            Curve::Sampled(c) => Ok(c.hermite(t)),
        }
    }
}

impl SampledCurve {
    fn hermite(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.t.len();
        let a = match self.t.partition_point(|s| *s <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let b = a + 1;
        let span = self.t[b] - self.t[a];
        let s = (t - self.t[a]) / span;
        let (s2, s3) = (s * s, s * s * s);
        let (h00, h10, h01, h11) = (2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2);
        let (d00, d10, d01, d11) = (6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s);
        let m = self.x[a].len();
        let mut x = Vec::with_capacity(m);
        let mut v = Vec::with_capacity(m);
        for i in 0..m {
            let (xa, xb, va, vb) = (self.x[a][i], self.x[b][i], self.v[a][i], self.v[b][i]);
            x.push(h00 * xa + h10 * span * va + h01 * xb + h11 * span * vb);
            v.push((d00 * xa + d10 * span * va + d01 * xb + d11 * span * vb) / span);
        }
        (x, v)
    }
}

/// Point and velocity of `c` at `t`; the point must lie in the chart.
pub fn curve_state(spec: &MetricSpec, c: &Curve, t: f64) -> Result<(Point, Vec<f64>)> {
    let (x, v) = c.state(t)?;
    let p = Point::new(x);
    spec.check_point(&p)?;
    Ok((p, v))
}

/// `(DV)^i = V̇^i + Σ_{j,k} γ̇_j Γ^i_{jk} V^k` for `V` given as expressions of `t`.
pub fn covderiv_along_curve(
    spec: &MetricSpec,
    c: &Curve,
    field: &ParamExprs,
    t: f64,
) -> Result<TangentVector> {
    let (p, vel) = curve_state(spec, c, t)?;
    let gamma = christoffel_at(spec, &p)?;
    let (v, dv) = field.jet1(&[t])?;
    let corr = gamma.contract(&vel, &v);
    let comp: Vec<f64> = (0..spec.dim()).map(|i| dv[i][0] - corr[i]).collect();
    Ok(TangentVector::new(p, comp))
}

/// `A[i][k] = −Σ_j γ̇_j Γ^i_{jk}` at curve time `t` (row-major), so that
/// parallel fields solve `f' = A f`.
fn transport_matrix(spec: &MetricSpec, c: &Curve, t: f64) -> Result<Vec<f64>> {
    let m = spec.dim();
    let (p, vel) = curve_state(spec, c, t)?;
    let gamma = christoffel_at(spec, &p)?;
    let mut a = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            a[i * m + k] = -(0..m).map(|j| vel[j] * gamma.gamma[[i, j, k]]).sum::<f64>();
        }
    }
    Ok(a)
}

fn mat_apply(a: &[f64], f: &[f64]) -> Vec<f64> {
    let m = f.len();
    (0..m)
        .map(|i| (0..m).map(|k| a[i * m + k] * f[k]).sum())
        .collect()
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Transports several vectors at once, calling `observe(t, vectors)` at the
/// start and after every step.
fn transport_many(
    spec: &MetricSpec,
    c: &Curve,
    t0: f64,
    t1: f64,
    mut vectors: Vec<Vec<f64>>,
    cfg: &SolverConfig,
    mut observe: impl FnMut(f64, &[Vec<f64>]),
) -> Result<Vec<Vec<f64>>> {
    for v in &vectors {
        if v.len() != spec.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: spec.dim(),
                found: v.len(),
            });
        }
    }
    c.check_time(t0)?;
    c.check_time(t1)?;
    let (n, h) = cfg.plan(t0, t1)?;
    observe(t0, &vectors);
    if n == 0 {
        return Ok(vectors);
    }
    let mut a_start = transport_matrix(spec, c, t0)?;
    for k in 0..n {
        let ta = step_time(t0, t1, h, n, k);
        let tb = step_time(t0, t1, h, n, k + 1);
        let a_mid = transport_matrix(spec, c, ta + 0.5 * h)?;
        let a_end = transport_matrix(spec, c, tb)?;
        for f in vectors.iter_mut() {
            let k1 = mat_apply(&a_start, f);
            let k2 = mat_apply(&a_mid, &axpy(f, 0.5 * h, &k1));
            let k3 = mat_apply(&a_mid, &axpy(f, 0.5 * h, &k2));
            let k4 = mat_apply(&a_end, &axpy(f, h, &k3));
            for i in 0..f.len() {
                f[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        observe(tb, &vectors);
        a_start = a_end;
    }
    Ok(vectors)
}

/// Parallel transport of `v` along `c` from `t0` to `t1`: RK4 on
/// `f'_i = −Σ_{j,k} γ̇_j Γ^i_{jk} f_k`.
pub fn parallel_transport(
    spec: &MetricSpec,
    c: &Curve,
    t0: f64,
    t1: f64,
    v: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let mut out = transport_many(spec, c, t0, t1, vec![v.to_vec()], cfg, |_, _| {})?;
    Ok(out.remove(0))
}

/// A transported frame at every integration step. `frames[k]` is row-major
/// with column `j` holding the `j`-th frame vector at `t[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrajectory {
    pub t: Vec<f64>,
    pub frames: Vec<Vec<f64>>,
}

impl FrameTrajectory {
    pub fn vector(&self, sample: usize, j: usize) -> Vec<f64> {
        let f = &self.frames[sample];
        let m = (f.len() as f64).sqrt() as usize;
        (0..m).map(|i| f[i * m + j]).collect()
    }
}

/// Transports each column of `basis` (row-major `m x m`) from `t0` to `t1`.
pub fn parallel_frame(
    spec: &MetricSpec,
    c: &Curve,
    t0: f64,
    t1: f64,
    basis: &[f64],
    cfg: &SolverConfig,
) -> Result<FrameTrajectory> {
    let m = spec.dim();
    if basis.len() != m * m {
        return Err(GeomError::DimensionMismatch {
            expected: m * m,
            found: basis.len(),
        });
    }
    let det = linalg::determinant(m, basis);
    let norms: f64 = (0..m)
        .map(|j| (0..m).map(|i| basis[i * m + j].powi(2)).sum::<f64>().sqrt())
        .product();
    if !(det.abs() > 1e-12 * norms) {
        return Err(GeomError::SingularFrame { det });
    }
    let columns = (0..m)
        .map(|j| (0..m).map(|i| basis[i * m + j]).collect())
        .collect();
    let mut out = FrameTrajectory {
        t: Vec::new(),
        frames: Vec::new(),
    };
    transport_many(spec, c, t0, t1, columns, cfg, |t, cols| {
        let mut f = vec![0.0; m * m];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..m {
                f[i * m + j] = col[i];
            }
        }
        out.t.push(t);
        out.frames.push(f);
    })?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// The step ending at `t_exit` left the chart (or could not be evaluated)
    /// and was discarded.
    DomainEscape { t_exit: f64 },
    MaxSteps,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Completed => write!(f, "completed"),
            Termination::DomainEscape { t_exit } => {
                write!(f, "domain_escape t_exit={}", format_real(*t_exit))
            }
            Termination::MaxSteps => write!(f, "max_steps"),
        }
    }
}

/// Samples in integration order (increasing `t` forward, decreasing when
/// integrating backwards).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
}

/// Seventeen significant digits in scientific notation.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// CSV with header `t,x1..xm,v1..vm`, one row per sample and a final
    /// `# termination=...` comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = self.samples.first().map_or(0, |s| s.x.len());
        let mut header = vec!["t".to_string()];
        header.extend((1..=m).map(|i| format!("x{i}")));
        header.extend((1..=m).map(|i| format!("v{i}")));
        writeln!(w, "{}", header.join(","))?;
        for s in &self.samples {
            let row: Vec<String> = std::iter::once(s.t)
                .chain(s.x.iter().copied())
                .chain(s.v.iter().copied())
                .map(format_real)
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        writeln!(w, "# termination={}", self.termination)
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

fn geodesic_rhs(spec: &MetricSpec, y: &[f64]) -> Result<Vec<f64>> {
    let m = spec.dim();
    let p = Point::new(y[..m].to_vec());
    let gamma: ChristoffelAt = christoffel_at(spec, &p)?;
    let u = &y[m..];
    let acc = gamma.contract(u, u);
    Ok(u.iter().copied().chain(acc).collect())
}

fn geodesic_step(spec: &MetricSpec, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let k1 = geodesic_rhs(spec, y)?;
    let k2 = geodesic_rhs(spec, &axpy(y, 0.5 * h, &k1))?;
    let k3 = geodesic_rhs(spec, &axpy(y, 0.5 * h, &k2))?;
    let k4 = geodesic_rhs(spec, &axpy(y, h, &k3))?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Integrates `ẍ_i = −Σ Γ^i_{jk} ẋ_j ẋ_k` from `(p, v)` over `t_span`,
/// stopping early if a step leaves the chart.
pub fn geodesic_shoot(
    spec: &MetricSpec,
    p: &Point,
    v: &[f64],
    t_span: (f64, f64),
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    let m = spec.dim();
    spec.check_point(p)?;
    if v.len() != m {
        return Err(GeomError::DimensionMismatch {
            expected: m,
            found: v.len(),
        });
    }
    let (t0, t1) = t_span;
    let (n, h, termination_if_full) = match cfg.plan(t0, t1) {
        Ok((n, h)) => (n, h, Termination::Completed),
        Err(GeomError::MaxSteps { .. }) => {
            let n = cfg.max_steps;
            let needed = ((t1 - t0).abs() / cfg.dt).ceil();
            (n, (t1 - t0) / needed, Termination::MaxSteps)
        }
        Err(e) => return Err(e),
    };
    let mut samples = vec![Sample {
        t: t0,
        x: p.coords().to_vec(),
        v: v.to_vec(),
    }];
    let mut y: Vec<f64> = p.coords().iter().chain(v).copied().collect();
    for k in 0..n {
        let tb = if termination_if_full == Termination::Completed {
            step_time(t0, t1, h, n, k + 1)
        } else {
            t0 + (k + 1) as f64 * h
        };
        let next = match geodesic_step(spec, &y, h) {
            Ok(next) if spec.domain().contains(&next[..m]) && next.iter().all(|c| c.is_finite()) => next,
            _ => {
                return Ok(Trajectory {
                    samples,
                    termination: Termination::DomainEscape { t_exit: tb },
                })
            }
        };
        y = next;
        samples.push(Sample {
            t: tb,
            x: y[..m].to_vec(),
            v: y[m..].to_vec(),
        });
    }
    Ok(Trajectory {
        samples,
        termination: termination_if_full,
    })
}

/// `|⟨γ̇, γ̇⟩|^{1/2}` at `t`.
pub fn speed_at(spec: &MetricSpec, c: &Curve, t: f64) -> Result<f64> {
    let (p, v) = curve_state(spec, c, t)?;
    Ok(spec.metric_at(&p)?.bilinear(&v, &v).abs().sqrt())
}

/// Length of `c` over `[a, b]` by composite Simpson quadrature with `n_quad`
/// panels (rounded up to an even count).
pub fn curve_length(spec: &MetricSpec, c: &Curve, a: f64, b: f64, n_quad: usize) -> Result<f64> {
    if n_quad < 2 {
        return Err(GeomError::InvalidArgument("n_quad must be at least 2".into()));
    }
    c.check_time(a)?;
    c.check_time(b)?;
    let n = n_quad + n_quad % 2;
    let h = (b - a) / n as f64;
    let mut sum = speed_at(spec, c, a)? + speed_at(spec, c, b)?;
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * speed_at(spec, c, a + k as f64 * h)?;
    }
    Ok(sum * h / 3.0)
}

/// `(P_{t+h→t} V(t+h) − V(t)) / h`, transporting with `dt = h / 100`.
pub fn transport_limit_covderiv(
    spec: &MetricSpec,
    c: &Curve,
    field: &ParamExprs,
    t: f64,
    h: f64,
) -> Result<TangentVector> {
    if !(h > 0.0) {
        return Err(GeomError::InvalidArgument(format!("h must be positive, got {h}")));
    }
    let (p, _) = curve_state(spec, c, t)?;
    let ahead = field.value(&[t + h])?;
    let here = field.value(&[t])?;
    let cfg = SolverConfig::new(h / 100.0, 1000)?;
    let back = parallel_transport(spec, c, t + h, t, &ahead, &cfg)?;
    Ok(TangentVector::new(
        p,
        back.iter().zip(&here).map(|(a, b)| (a - b) / h).collect::<Vec<_>>(),
    ))
}

/// A one-parameter family of curves `(s, t) ↦ Γ(s, t)` on a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    exprs: ParamExprs,
    pub s_range: (f64, f64),
    pub t_range: (f64, f64),
}

impl FamilySpec {
    pub fn parse(
        spec: &MetricSpec,
        texts: &[&str],
        s_range: (f64, f64),
        t_range: (f64, f64),
    ) -> Result<Self> {
        for (lo, hi) in [s_range, t_range] {
            if !(lo <= hi) {
                return Err(GeomError::InvalidArgument(format!(
                    "family rectangle side [{lo}, {hi}] is empty"
                )));
            }
        }
        Ok(FamilySpec {
            exprs: ParamExprs::parse(spec, texts, &["s", "t"])?,
            s_range,
            t_range,
        })
    }

    pub fn check(&self, s: f64, t: f64) -> Result<()> {
        for (x, (lo, hi)) in [(s, self.s_range), (t, self.t_range)] {
            if !(lo <= x && x <= hi) {
                return Err(GeomError::OutOfInterval { t: x, lo, hi });
            }
        }
        Ok(())
    }

    /// Point, `∂_s Γ` and `∂_t Γ` at `(s, t)`.
    pub fn jet(&self, s: f64, t: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        self.check(s, t)?;
        let (x, d) = self.exprs.jet1(&[s, t])?;
        Ok((x, d.iter().map(|r| r[0]).collect(), d.iter().map(|r| r[1]).collect()))
    }

    /// The longitudinal curve `t ↦ Γ(s, t)`.
    pub fn longitudinal(&self, s: f64) -> Result<Curve> {
        self.check(s, self.t_range.0)?;
        Curve::from_exprs(self.exprs.clone(), vec![s, 0.0], 1, self.t_range.0, self.t_range.1)
    }

    /// The transverse curve `s ↦ Γ(s, t)`.
    pub fn transverse(&self, t: f64) -> Result<Curve> {
        self.check(self.s_range.0, t)?;
        Curve::from_exprs(self.exprs.clone(), vec![0.0, t], 0, self.s_range.0, self.s_range.1)
    }
}

/// Covariant derivative of a vector field along the family given its value
/// `w` and partial `dw` in the chosen direction with velocity `vel`.
fn along(gamma: &ChristoffelAt, vel: &[f64], w: &[f64], dw: &[f64]) -> Vec<f64> {
    let corr = gamma.contract(vel, w);
    dw.iter().zip(&corr).map(|(a, b)| a - b).collect()
}

/// `(D_1 W, D_2 W)` at `(s, t)` for `W` given as expressions of `(s, t)`:
/// `D_1` differentiates along transverse curves (in `s`), `D_2` along
/// longitudinal curves (in `t`).
pub fn family_covderivs(
    spec: &MetricSpec,
    fam: &FamilySpec,
    field: &ParamExprs,
    s: f64,
    t: f64,
) -> Result<(TangentVector, TangentVector)> {
    let (x, xs, xt) = fam.jet(s, t)?;
    let p = Point::new(x);
    let gamma = christoffel_at(spec, &p)?;
    let (w, dw) = field.jet1(&[s, t])?;
    let dws: Vec<f64> = dw.iter().map(|r| r[0]).collect();
    let dwt: Vec<f64> = dw.iter().map(|r| r[1]).collect();
    Ok((
        TangentVector::new(p.clone(), along(&gamma, &xs, &w, &dws)),
        TangentVector::new(p, along(&gamma, &xt, &w, &dwt)),
    ))
}

/// `(D_1 ∂_t Γ, D_2 ∂_s Γ)` at `(s, t)` from exact mixed partials.
pub fn family_velocity_covderivs(
    spec: &MetricSpec,
    fam: &FamilySpec,
    s: f64,
    t: f64,
) -> Result<(TangentVector, TangentVector)> {
    fam.check(s, t)?;
    let jet = fam.exprs.jet2(&[s, t])?;
    let x: Vec<f64> = jet.iter().map(|d| d.value).collect();
    let xs: Vec<f64> = jet.iter().map(|d| d.grad[0]).collect();
    let xt: Vec<f64> = jet.iter().map(|d| d.grad[1]).collect();
    let xst: Vec<f64> = jet.iter().map(|d| d.hess_at(0, 1)).collect();
    let p = Point::new(x);
    let gamma = christoffel_at(spec, &p)?;
    Ok((
        TangentVector::new(p.clone(), along(&gamma, &xs, &xt, &xst)),
        TangentVector::new(p, along(&gamma, &xt, &xs, &xst)),
    ))
}
