//! The named-check verification suite.
//!
//! Every check draws its own sample stream from a SplitMix64 generator
//! seeded with `seed + k * 0x9E3779B97F4A7C15` (wrapping) for the `k`-th
//! check, so adding samples to one check never shifts another. Points are
//! drawn uniformly from the domain's sampling box shrunk by 10% on every
//! side. Thresholds are given at the default tolerance `1e-8` and scale
//! linearly with the requested tolerance.

use rayon::prelude::*;

use crate::connection::{covariant_differential_at, koszul_sides, torsion_residual, MetricField, VectorField};
use crate::curvature::{
    commutator_curvature_check, einstein_check, holonomy_curvature_estimate, identity_residuals,
    riemann_at, second_bianchi_residual,
};
use crate::error::Result;
use crate::linalg::DEFAULT_DEGENERACY_TOL;
use crate::manifold::{Covector, MetricSpec, Point, TangentVector};
use crate::rng::SplitMix64;
use crate::transport::{
    geodesic_shoot, parallel_transport, Curve, FamilySpec, ParamExprs, SolverConfig,
};

/// Tolerance the per-check thresholds are quoted at.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Environment variable overriding [`DEFAULT_TOL`].
pub const TOL_ENV: &str = "GEOM_DEFAULT_TOL";

/// Finite-difference step for the covariant derivative of the Riemann tensor.
pub const BIANCHI_STEP: f64 = 1e-4;
/// Loop sizes of the holonomy convergence run.
pub const HOLONOMY_DELTAS: [f64; 3] = [4e-2, 2e-2, 1e-2];
/// Length of the geodesic constant-speed run.
pub const GEODESIC_SPAN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub dt: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 50,
            seed: 0,
            tol: DEFAULT_TOL,
            dt: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub samples: usize,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Reported but not counted towards the overall verdict.
    pub informational: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed && !c.informational)
    }
}

/// Sampling box shrunk by `inset` (a fraction of its width) on every side.
pub fn inset_box(spec: &MetricSpec, inset: f64) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = spec.domain().sampling_box();
    lo.iter()
        .zip(&hi)
        .map(|(l, h)| {
            let w = h - l;
            (l + inset * w, h - inset * w)
        })
        .unzip()
}

pub fn sample_point(rng: &mut SplitMix64, lo: &[f64], hi: &[f64]) -> Point {
    Point::new(
        lo.iter()
            .zip(hi)
            .map(|(l, h)| rng.uniform_open(*l, *h))
            .collect::<Vec<_>>(),
    )
}

pub fn random_vector(rng: &mut SplitMix64, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

fn lit(c: f64) -> String {
    if c < 0.0 {
        format!("({c:?})")
    } else {
        format!("{c:?}")
    }
}

/// A random polynomial of total degree `degree` in the variables `vars`,
/// written in the shifted and scaled variables `(v - center) / scale` with
/// coefficients uniform in `[-1, 1]`.
pub fn random_polynomial(
    rng: &mut SplitMix64,
    vars: &[&str],
    center: &[f64],
    scale: &[f64],
    degree: usize,
) -> String {
    let u: Vec<String> = vars
        .iter()
        .zip(center.iter().zip(scale))
        .map(|(v, (c, s))| format!("(({v} - {}) / {})", lit(*c), lit(*s)))
        .collect();
    let mut terms = vec![lit(rng.uniform(-1.0, 1.0))];
    let mut monomials: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..degree {
        let mut next = Vec::new();
        for mono in &monomials {
            let start = mono.last().copied().unwrap_or(0);
            for k in start..vars.len() {
                let mut m = mono.clone();
                m.push(k);
                next.push(m);
            }
        }
        for mono in &next {
            let factors: Vec<&str> = mono.iter().map(|k| u[*k].as_str()).collect();
            terms.push(format!("{} * {}", lit(rng.uniform(-1.0, 1.0)), factors.join(" * ")));
        }
        monomials = next;
    }
    terms.join(" + ")
}

/// A random polynomial vector field on the chart, centered on the inset box.
pub fn random_field(spec: &MetricSpec, rng: &mut SplitMix64, degree: usize) -> Result<VectorField> {
    let (lo, hi) = inset_box(spec, 0.1);
    let center: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let scale: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (h - l)).collect();
    let coords: Vec<&str> = spec.coords().iter().map(String::as_str).collect();
    let texts: Vec<String> = (0..spec.dim())
        .map(|_| random_polynomial(rng, &coords, &center, &scale, degree))
        .collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    VectorField::parse(spec, &refs)
}

/// A random quadratic curve `p + t a + t² b` on `[0, 1]` whose coefficients
/// are at most `reach` times the box half-widths. With `reach <= 0.1` and
/// `p` in the inset box, the curve stays inside the sampling box.
pub fn random_curve(
    spec: &MetricSpec,
    rng: &mut SplitMix64,
    p: &Point,
    reach: f64,
) -> Result<Curve> {
    let (lo, hi) = inset_box(spec, 0.1);
    let texts: Vec<String> = (0..spec.dim())
        .map(|i| {
            let w = 0.5 * (hi[i] - lo[i]) * reach;
            let a = rng.uniform(-w, w);
            let b = rng.uniform(-w, w);
            format!("{} + {} * t + {} * t^2", lit(p.coords()[i]), lit(a), lit(b))
        })
        .collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    Curve::analytic(spec, &refs, 0.0, 1.0)
}

/// A random vector with `|⟨v, v⟩| = speed²`, resampled while nearly null.
pub fn random_nonnull_vector(
    spec: &MetricSpec,
    rng: &mut SplitMix64,
    p: &Point,
    speed: f64,
) -> Result<Vec<f64>> {
    let g = spec.metric_at(p)?;
    let m = spec.dim();
    let mut v = random_vector(rng, m);
    for _ in 0..100 {
        let q = g.bilinear(&v, &v);
        let bound: f64 = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| (g.get(i, j) * v[i] * v[j]).abs())
            .sum();
        if q.abs() > 0.1 * bound {
            break;
        }
        v = random_vector(rng, m);
    }
    let q = g.bilinear(&v, &v).abs().sqrt();
    Ok(v.iter().map(|x| x * speed / q).collect())
}

struct Checker<'a> {
    spec: &'a MetricSpec,
    cfg: VerifyConfig,
    scale: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    results: Vec<CheckResult>,
}

/// Per-sample outcome: a residual or an error message.
type Outcome = std::result::Result<f64, String>;

impl Checker<'_> {
    fn rng(&self, k: usize) -> SplitMix64 {
        SplitMix64::new(
            self.cfg
                .seed
                .wrapping_add((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        )
    }

    /// Draws `n` points for check `k` and the generator state after them.
    fn points(&self, k: usize, n: usize) -> Vec<(Point, SplitMix64)> {
        let mut rng = self.rng(k);
        (0..n)
            .map(|_| {
                let p = sample_point(&mut rng, &self.lo, &self.hi);
                let sub = SplitMix64::new(rng.next_u64());
                (p, sub)
            })
            .collect()
    }

    fn run(
        &mut self,
        name: &'static str,
        n: usize,
        base_threshold: f64,
        f: impl Fn(&MetricSpec, &Point, &mut SplitMix64) -> Result<f64> + Sync,
    ) {
        let k = self.results.len();
        let spec = self.spec;
        let outcomes: Vec<Outcome> = self
            .points(k, n)
            .into_par_iter()
            .map(|(p, mut rng)| f(spec, &p, &mut rng).map_err(|e| e.to_string()))
            .collect();
        self.record(name, base_threshold, outcomes, String::new());
    }

    fn record(&mut self, name: &'static str, base_threshold: f64, outcomes: Vec<Outcome>, detail: String) {
        let threshold = base_threshold * self.scale;
        let mut residual: f64 = 0.0;
        let mut error = None;
        for o in &outcomes {
            match o {
                Ok(r) if r.is_nan() => residual = f64::NAN,
                Ok(r) => residual = residual.max(*r),
                Err(e) => {
                    error.get_or_insert_with(|| e.clone());
                }
            }
        }
        let passed = error.is_none() && residual <= threshold;
        self.results.push(CheckResult {
            name,
            samples: outcomes.len(),
            residual,
            threshold,
            passed,
            informational: false,
            detail: error.unwrap_or(detail),
        });
    }
}

fn flat_sharp_roundtrip(spec: &MetricSpec, p: &Point, rng: &mut SplitMix64) -> Result<f64> {
    let v = random_vector(rng, spec.dim());
    let w = spec.flat_field_at(&TangentVector::new(p.clone(), v.clone()))?;
    let back = spec.sharp_field_at(&w)?;
    let omega = Covector {
        base: p.clone(),
        comp: random_vector(rng, spec.dim()),
    };
    let again = spec.flat_field_at(&spec.sharp_field_at(&omega)?)?;
    let err_v = back.comp.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let err_w = again
        .comp
        .iter()
        .zip(&omega.comp)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(err_v.max(err_w))
}

fn metric_compatibility(spec: &MetricSpec, p: &Point, _: &mut SplitMix64) -> Result<f64> {
    Ok(covariant_differential_at(spec, &MetricField, p, 1e-5)?.max_abs())
}

fn koszul(spec: &MetricSpec, p: &Point, rng: &mut SplitMix64) -> Result<f64> {
    let x = random_field(spec, rng, 3)?;
    let y = random_field(spec, rng, 3)?;
    let z = random_field(spec, rng, 3)?;
    let sides = koszul_sides(spec, &x, &y, &z, p)?;
    Ok(sides.residual() / sides.scale.max(1.0))
}

fn gradient_duality(spec: &MetricSpec, p: &Point, rng: &mut SplitMix64) -> Result<f64> {
    let (lo, hi) = inset_box(spec, 0.1);
    let center: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let scale: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (h - l)).collect();
    let coords: Vec<&str> = spec.coords().iter().map(String::as_str).collect();
    let poly = random_polynomial(rng, &coords, &center, &scale, 3);
    let f = spec.parse_scalar(&format!("sin({poly}) + {poly}"))?;
    let x = TangentVector::new(p.clone(), random_vector(rng, spec.dim()));
    let grad = spec.gradient_at(&f, p)?;
    let lhs = spec.inner_at(&grad, &x)?;
    let rhs = spec.directional_derivative(&f, &x)?;
    Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
}

fn transport_isometry(spec: &MetricSpec, p: &Point, rng: &mut SplitMix64, dt: f64) -> Result<f64> {
    let c = random_curve(spec, rng, p, 0.1)?;
    let v = random_nonnull_vector(spec, rng, p, 1.0)?;
    let w = random_nonnull_vector(spec, rng, p, 1.0)?;
    let cfg = SolverConfig::new(dt, 10_000_000)?;
    let pv = parallel_transport(spec, &c, 0.0, 1.0, &v, &cfg)?;
    let pw = parallel_transport(spec, &c, 0.0, 1.0, &w, &cfg)?;
    let g0 = spec.metric_at(p)?;
    let g1 = spec.metric_at(&Point::new(c.state(1.0)?.0))?;
    let mut worst: f64 = 0.0;
    for (a, b, ta, tb) in [(&v, &w, &pv, &pw), (&v, &v, &pv, &pv), (&w, &w, &pw, &pw)] {
        worst = worst.max((g1.bilinear(ta, tb) - g0.bilinear(a, b)).abs());
    }
    Ok(worst)
}

fn transport_inverse(spec: &MetricSpec, p: &Point, rng: &mut SplitMix64, dt: f64) -> Result<f64> {
    let c = random_curve(spec, rng, p, 0.1)?;
    let v = random_nonnull_vector(spec, rng, p, 1.0)?;
    let cfg = SolverConfig::new(dt, 10_000_000)?;
    let there = parallel_transport(spec, &c, 0.0, 1.0, &v, &cfg)?;
    let back = parallel_transport(spec, &c, 1.0, 0.0, &there, &cfg)?;
    Ok(back.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Relative drift of the speed along a geodesic with `|⟨v, v⟩| = speed²`.
pub fn geodesic_speed_drift(
    spec: &MetricSpec,
    p: &Point,
    v: &[f64],
    span: f64,
    dt: f64,
) -> Result<f64> {
    let cfg = SolverConfig::new(dt, 100_000_000)?;
    let tr = geodesic_shoot(spec, p, v, (0.0, span), &cfg)?;
    let speed = |x: &[f64], u: &[f64]| -> Result<f64> {
        Ok(spec.metric_at(&Point::new(x.to_vec()))?.bilinear(u, u).abs().sqrt())
    };
    let s0 = speed(&tr.samples[0].x, &tr.samples[0].v)?;
    let mut worst: f64 = 0.0;
    for smp in &tr.samples {
        worst = worst.max((speed(&smp.x, &smp.v)? - s0).abs() / s0);
    }
    Ok(worst)
}

fn geodesic_speed(spec: &MetricSpec, p: &Point, rng: &mut SplitMix64, dt: f64) -> Result<f64> {
    let (lo, hi) = inset_box(spec, 0.1);
    let width = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min);
    let v = random_nonnull_vector(spec, rng, p, 1.0)?;
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    // keep the coordinate path within a fraction of the box
    let factor = (0.05 * width / norm).min(1.0);
    let v: Vec<f64> = v.iter().map(|x| x * factor).collect();
    geodesic_speed_drift(spec, p, &v, GEODESIC_SPAN, dt)
}

fn riemann_symmetries(spec: &MetricSpec, p: &Point, _: &mut SplitMix64) -> Result<f64> {
    let r = identity_residuals(spec, p)?;
    let worst = r.antisym12.max(r.antisym34).max(r.pair_symmetry);
    Ok(if worst == 0.0 { 0.0 } else { worst / r.scale })
}

fn first_bianchi(spec: &MetricSpec, p: &Point, _: &mut SplitMix64) -> Result<f64> {
    let r = identity_residuals(spec, p)?;
    Ok(if r.first_bianchi == 0.0 {
        0.0
    } else {
        r.first_bianchi / r.scale
    })
}

fn second_bianchi(spec: &MetricSpec, p: &Point, _: &mut SplitMix64) -> Result<f64> {
    let scale = riemann_at(spec, p)?.lowered.max_abs().max(1.0);
    Ok(second_bianchi_residual(spec, p, BIANCHI_STEP)? / scale)
}

/// Coordinate rectangle family `p + s e_a + t e_b`.
pub fn coordinate_family(spec: &MetricSpec, p: &Point, a: usize, b: usize, half: f64) -> Result<FamilySpec> {
    let texts: Vec<String> = (0..spec.dim())
        .map(|i| {
            let mut e = lit(p.coords()[i]);
            if i == a {
                e.push_str(" + s");
            }
            if i == b {
                e.push_str(" + t");
            }
            e
        })
        .collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    FamilySpec::parse(spec, &refs, (-half, half), (-half, half))
}

/// Errors of the holonomy estimator against `R(∂_a, ∂_b) z` for each loop
/// size in [`HOLONOMY_DELTAS`], relative to `max(1, |R z|)`.
pub fn holonomy_errors(spec: &MetricSpec, p: &Point, z: &[f64], a: usize, b: usize, dt: f64) -> Result<[f64; 3]> {
    let fam = coordinate_family(spec, p, a, b, 0.05)?;
    let m = spec.dim();
    let unit = |k: usize| (0..m).map(|i| if i == k { 1.0 } else { 0.0 }).collect::<Vec<_>>();
    let exact = riemann_at(spec, p)?.apply(&unit(a), &unit(b), z);
    let norm = exact.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut out = [0.0; 3];
    for (slot, d) in out.iter_mut().zip(HOLONOMY_DELTAS) {
        let cfg = SolverConfig::new(dt.min(d / 100.0), 10_000_000)?;
        let est = holonomy_curvature_estimate(spec, &fam, z, d, d, &cfg)?;
        *slot = est
            .comp
            .iter()
            .zip(&exact)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
            / norm;
    }
    Ok(out)
}

/// Error floor below which the holonomy run counts as exact.
const HOLONOMY_FLOOR: f64 = 1e-9;

fn holonomy(spec: &MetricSpec, p: &Point, rng: &mut SplitMix64, dt: f64) -> Result<f64> {
    if spec.dim() < 2 {
        return Ok(0.0);
    }
    let z = random_vector(rng, spec.dim());
    let errors = holonomy_errors(spec, p, &z, 0, 1, dt)?;
    if errors[2] <= HOLONOMY_FLOOR {
        return Ok(errors[2]);
    }
    let first_order = errors.windows(2).all(|w| w[0] / w[1] >= 1.6);
    Ok(if first_order { errors[2] } else { f64::INFINITY })
}

fn commutator(spec: &MetricSpec, p: &Point, rng: &mut SplitMix64) -> Result<f64> {
    let (lo, hi) = inset_box(spec, 0.1);
    let texts: Vec<String> = (0..spec.dim())
        .map(|i| {
            let w = 0.05 * (hi[i] - lo[i]);
            format!(
                "{} + {} * s + {} * t + {} * s * t",
                lit(p.coords()[i]),
                lit(rng.uniform(-w, w)),
                lit(rng.uniform(-w, w)),
                lit(rng.uniform(-w, w))
            )
        })
        .collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let fam = FamilySpec::parse(spec, &refs, (-0.5, 0.5), (-0.5, 0.5))?;
    let w_texts: Vec<String> = (0..spec.dim())
        .map(|_| random_polynomial(rng, &["s", "t"], &[0.0, 0.0], &[1.0, 1.0], 2))
        .collect();
    let w_refs: Vec<&str> = w_texts.iter().map(String::as_str).collect();
    let w = ParamExprs::parse(spec, &w_refs, &["s", "t"])?;
    let scale = riemann_at(spec, p)?.lowered.max_abs().max(1.0);
    Ok(commutator_curvature_check(spec, &fam, &w, 0.0, 0.0)? / scale)
}

/// Runs every check. Results come back in a fixed order and depend only on
/// the chart and the configuration.
pub fn run_verify(spec: &MetricSpec, cfg: &VerifyConfig) -> VerifyReport {
    let (lo, hi) = inset_box(spec, 0.1);
    let mut ck = Checker {
        spec,
        cfg: *cfg,
        scale: cfg.tol / DEFAULT_TOL,
        lo,
        hi,
        results: Vec::new(),
    };
    let n = cfg.samples.max(1);
    let dt = cfg.dt;

    let report = spec.validate(n, cfg.seed, DEFAULT_DEGENERACY_TOL);
    let detail = match report.index {
        Some(nu) => format!("index={nu}"),
        None => "index not constant".into(),
    };
    let failures = report.failures.len() as f64;
    let outcomes = match report.clone().into_result() {
        Ok(_) => vec![Ok(failures)],
        Err(e) => vec![Err(e.to_string())],
    };
    ck.record("metric_validation", 0.0, outcomes, detail);
    ck.results.last_mut().expect("just pushed").samples = n;

    ck.run("torsion", n, 0.0, |s, p, _| torsion_residual(s, p));
    ck.run("flat_sharp_roundtrip", n, 1e-12, flat_sharp_roundtrip);
    ck.run("metric_compatibility", n, 1e-7, metric_compatibility);
    ck.run("koszul", n, 1e-9, koszul);
    ck.run("gradient_duality", n, 1e-9, gradient_duality);
    ck.run("transport_isometry", n.min(20), 1e-7, move |s, p, r| transport_isometry(s, p, r, dt));
    ck.run("transport_inverse", n.min(20), 1e-8, move |s, p, r| transport_inverse(s, p, r, dt));
    ck.run("geodesic_constant_speed", n.min(6), 1e-6, move |s, p, r| geodesic_speed(s, p, r, dt));
    ck.run("riemann_symmetries", n, 1e-10, riemann_symmetries);
    ck.run("first_bianchi", n, 1e-10, first_bianchi);
    ck.run("second_bianchi", n.min(10), 1e-6, second_bianchi);
    ck.run("holonomy_convergence", n.min(3), 5e-2, move |s, p, r| holonomy(s, p, r, dt));
    ck.run("commutator_lemma", n.min(10), 1e-5, commutator);

    let einstein = einstein_check(spec, n, cfg.seed, cfg.tol);
    ck.results.push(CheckResult {
        name: "einstein",
        samples: n,
        residual: einstein.max_deviation,
        threshold: cfg.tol,
        passed: einstein.is_einstein,
        informational: true,
        detail: format!(
            "kappa={:.16e} eigen_range=[{:.16e}, {:.16e}]",
            einstein.kappa_estimate, einstein.ric_minus_kg_eigen_range.0, einstein.ric_minus_kg_eigen_range.1
        ),
    });
    VerifyReport { checks: ck.results }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::preset;
    use std::collections::BTreeMap;

    #[test]
    fn polynomial_text_parses() {
        let mut rng = SplitMix64::new(4);
        let text = random_polynomial(&mut rng, &["x", "y"], &[0.0, -1.5], &[2.0, 0.5], 3);
        let e = crate::expr::parse(&text, &["x", "y"]).unwrap();
        assert!(e.eval_slots_real(&[0.3, 0.2]).unwrap().is_finite());
    }

    #[test]
    fn sphere_suite_passes() {
        let s = preset("sphere", &BTreeMap::from([("r".to_string(), 1.0)])).unwrap();
        let cfg = VerifyConfig {
            samples: 8,
            seed: 7,
            ..Default::default()
        };
        let rep = run_verify(&s, &cfg);
        assert!(rep.passed(), "{:#?}", rep.checks);
        assert_eq!(rep, run_verify(&s, &cfg));
    }

    #[test]
    fn zero_tolerance_fails() {
        let s = preset("sphere", &BTreeMap::from([("r".to_string(), 1.0)])).unwrap();
        let cfg = VerifyConfig {
            samples: 4,
            seed: 1,
            tol: 0.0,
            ..Default::default()
        };
        let rep = run_verify(&s, &cfg);
        assert!(!rep.passed());
        assert!(rep.failing().next().is_some());
    }
}
