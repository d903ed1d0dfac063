//! One coordinate chart of a semi-Riemannian manifold.
//!
//! A [`MetricSpec`] holds the component functions `g_ij` of the metric as
//! expressions over the chart coordinates and named parameters, together
//! with the open coordinate box the chart covers.

mod presets;
mod schema;
mod validate;

pub use presets::{preset, Preset};
pub use schema::{load_spec, Bound, DomainDocument, SpecDocument};
pub use validate::{FailureKind, SampleFailure, ValidationReport};

use std::collections::BTreeMap;

use crate::error::{GeomError, Result};
use crate::expr::{self, Expr};
use crate::linalg::{self, SymMatrix, DEFAULT_DEGENERACY_TOL};
use crate::tensor::Tensor;

/// Open coordinate box `lower[i] < x_i < upper[i]`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(GeomError::Schema(format!(
                "domain has {} lower and {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(GeomError::Schema(format!(
                    "domain bound {i} is empty: ({lo}, {hi})"
                )));
            }
        }
        Ok(Domain { lower, upper })
    }

    pub fn unbounded(dim: usize) -> Self {
        Domain {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo < *v && *v < *hi)
    }

    /// Finite box used for sampling: infinite bounds are replaced by `-10`/`10`,
    /// or by a point 20 units past the finite bound when that bound lies
    /// outside `[-10, 10]`.
    pub fn sampling_box(&self) -> (Vec<f64>, Vec<f64>) {
        const CLIP: f64 = 10.0;
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for (l, u) in self.lower.iter().zip(&self.upper) {
            let (l2, u2) = match (l.is_finite(), u.is_finite()) {
                (true, true) => (*l, *u),
                (true, false) => (*l, if *l < CLIP { CLIP } else { l + 2.0 * CLIP }),
                (false, true) => (if *u > -CLIP { -CLIP } else { u - 2.0 * CLIP }, *u),
                (false, false) => (-CLIP, CLIP),
            };
            lo.push(l2);
            hi.push(u2);
        }
        (lo, hi)
    }
}

/// A point of the chart, given by its coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Point(coords.into())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Tangent vector in the coordinate frame `(d_1, ..., d_m)` at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub comp: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Point, comp: impl Into<Vec<f64>>) -> Self {
        TangentVector {
            base,
            comp: comp.into(),
        }
    }
}

/// Covector in the dual coordinate frame at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector {
    pub base: Point,
    pub comp: Vec<f64>,
}

/// Metric components and their first partials at a point.
#[derive(Debug, Clone)]
pub struct MetricJet1 {
    pub g: SymMatrix,
    /// `dg[[k, i, j]] = d_k g_ij`
    pub dg: Tensor,
}

/// Metric components with first and second partials at a point.
#[derive(Debug, Clone)]
pub struct MetricJet2 {
    pub g: SymMatrix,
    pub dg: Tensor,
    /// `ddg[[l, k, i, j]] = d_l d_k g_ij`
    pub ddg: Tensor,
}

#[derive(Debug, Clone)]
struct ComponentPlan {
    i: usize,
    j: usize,
    /// Also evaluate `g_ji` and average: the two expressions differ textually.
    mirror: bool,
    constant: bool,
}

/// A single-chart semi-Riemannian manifold description. Immutable after
/// construction; all evaluations are pure.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    name: String,
    coords: Vec<String>,
    domain: Domain,
    metric: Vec<Expr>,
    metric_src: Vec<String>,
    params: Vec<(String, f64)>,
    plan: Vec<ComponentPlan>,
}

fn check_identifier(name: &str, what: &str) -> Result<()> {
    let mut chars = name.chars();
    let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok {
        return Err(GeomError::Schema(format!("invalid {what} name `{name}`")));
    }
    if expr::Func::from_name(name).is_some() {
        return Err(GeomError::Schema(format!(
            "{what} name `{name}` collides with a function"
        )));
    }
    Ok(())
}

impl MetricSpec {
    /// Builds a spec from component source strings (row-major `m x m`).
    pub fn new(
        name: impl Into<String>,
        coords: Vec<String>,
        domain: Domain,
        metric_src: Vec<String>,
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let m = coords.len();
        if m == 0 {
            return Err(GeomError::Schema("dimension must be positive".into()));
        }
        if domain.dim() != m {
            return Err(GeomError::Schema(format!(
                "domain has {} bounds for {m} coordinates",
                domain.dim()
            )));
        }
        if metric_src.len() != m * m {
            return Err(GeomError::Schema(format!(
                "metric needs {} components, got {}",
                m * m,
                metric_src.len()
            )));
        }
        let params: Vec<(String, f64)> = params.into_iter().collect();
        let mut seen: Vec<&str> = Vec::new();
        for name in coords.iter().map(|s| s.as_str()).chain(params.iter().map(|p| p.0.as_str())) {
            check_identifier(name, "identifier")?;
            if seen.contains(&name) {
                return Err(GeomError::Schema(format!("identifier `{name}` declared twice")));
            }
            seen.push(name);
        }
        if let Some((k, v)) = params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(GeomError::Schema(format!("parameter `{k}` is not finite ({v})")));
        }
        let metric = metric_src
            .iter()
            .map(|src| expr::parse(src, &seen))
            .collect::<Result<Vec<_>>>()?;
        let mut plan = Vec::new();
        for i in 0..m {
            for j in i..m {
                let a = &metric[i * m + j];
                let b = &metric[j * m + i];
                plan.push(ComponentPlan {
                    i,
                    j,
                    mirror: a != b,
                    constant: a.independent_of_first(m) && b.independent_of_first(m),
                });
            }
        }
        Ok(MetricSpec {
            name: name.into(),
            coords,
            domain,
            metric,
            metric_src,
            params,
            plan,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn component_expr(&self, i: usize, j: usize) -> &Expr {
        &self.metric[i * self.dim() + j]
    }

    pub fn component_source(&self, i: usize, j: usize) -> &str {
        &self.metric_src[i * self.dim() + j]
    }

    /// Coordinates followed by parameters: the identifier order every
    /// chart-level expression is parsed against.
    pub fn identifiers(&self) -> Vec<&str> {
        self.coords
            .iter()
            .map(String::as_str)
            .chain(self.params.iter().map(|(k, _)| k.as_str()))
            .collect()
    }

    /// Parses a scalar field over the chart coordinates and parameters.
    pub fn parse_scalar(&self, text: &str) -> Result<Expr> {
        expr::parse(text, &self.identifiers())
    }

    /// Parses expressions over `leading` variables followed by the parameters
    /// (curves use `["t"]`, families `["s", "t"]`).
    pub fn parse_with_leading(&self, text: &str, leading: &[&str]) -> Result<Expr> {
        let vars: Vec<&str> = leading
            .iter()
            .copied()
            .chain(self.params.iter().map(|(k, _)| k.as_str()))
            .collect();
        expr::parse(text, &vars)
    }

    /// Slot values for evaluating a chart expression at `x`.
    pub fn slot_values(&self, x: &[f64]) -> Vec<f64> {
        x.iter().copied().chain(self.params.iter().map(|p| p.1)).collect()
    }

    /// Slot values for an expression parsed with [`MetricSpec::parse_with_leading`].
    pub fn leading_slot_values(&self, leading: &[f64]) -> Vec<f64> {
        self.slot_values(leading)
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        if !self.domain.contains(p.coords()) {
            return Err(GeomError::OutOfChart {
                point: p.coords().to_vec(),
            });
        }
        Ok(())
    }

    /// Raw component values without symmetrization (used by validation).
    pub(crate) fn raw_components(&self, x: &[f64]) -> Result<Vec<f64>> {
        let vals = self.slot_values(x);
        self.metric.iter().map(|e| e.eval_slots_real(&vals)).collect()
    }

    /// `g_ij(p)`, symmetrized.
    pub fn metric_at(&self, p: &Point) -> Result<SymMatrix> {
        self.check_point(p)?;
        let m = self.dim();
        let vals = self.slot_values(p.coords());
        let mut data = vec![0.0; m * m];
        for c in &self.plan {
            let mut v = self.metric[c.i * m + c.j].eval_slots_real(&vals)?;
            if c.mirror {
                v = 0.5 * (v + self.metric[c.j * m + c.i].eval_slots_real(&vals)?);
            }
            data[c.i * m + c.j] = v;
            data[c.j * m + c.i] = v;
        }
        SymMatrix::from_row_major(m, data)
    }

    /// Metric and `d_k g_ij` from first-order dual evaluation.
    pub fn jet1(&self, p: &Point) -> Result<MetricJet1> {
        self.check_point(p)?;
        let m = self.dim();
        let vals = self.slot_values(p.coords());
        let mut g = vec![0.0; m * m];
        let mut dg = Tensor::zeros(m, 3);
        for c in &self.plan {
            if c.constant {
                let mut v = self.metric[c.i * m + c.j].eval_slots_real(&vals)?;
                if c.mirror {
                    v = 0.5 * (v + self.metric[c.j * m + c.i].eval_slots_real(&vals)?);
                }
                g[c.i * m + c.j] = v;
                g[c.j * m + c.i] = v;
                continue;
            }
            let mut a = self.metric[c.i * m + c.j].eval_slots_dual1(&vals, m)?;
            if c.mirror {
                let b = self.metric[c.j * m + c.i].eval_slots_dual1(&vals, m)?;
                a.value = 0.5 * (a.value + b.value);
                for (x, y) in a.grad.iter_mut().zip(&b.grad) {
                    *x = 0.5 * (*x + y);
                }
            }
            g[c.i * m + c.j] = a.value;
            g[c.j * m + c.i] = a.value;
            for (k, d) in a.grad.iter().enumerate() {
                dg[[k, c.i, c.j]] = *d;
                dg[[k, c.j, c.i]] = *d;
            }
        }
        Ok(MetricJet1 {
            g: SymMatrix::from_row_major(m, g)?,
            dg,
        })
    }

    /// Metric with first and second partials from second-order dual evaluation.
    pub fn jet2(&self, p: &Point) -> Result<MetricJet2> {
        self.check_point(p)?;
        let m = self.dim();
        let vals = self.slot_values(p.coords());
        let mut g = vec![0.0; m * m];
        let mut dg = Tensor::zeros(m, 3);
        let mut ddg = Tensor::zeros(m, 4);
        for c in &self.plan {
            if c.constant {
                let mut v = self.metric[c.i * m + c.j].eval_slots_real(&vals)?;
                if c.mirror {
                    v = 0.5 * (v + self.metric[c.j * m + c.i].eval_slots_real(&vals)?);
                }
                g[c.i * m + c.j] = v;
                g[c.j * m + c.i] = v;
                continue;
            }
            let mut a = self.metric[c.i * m + c.j].eval_slots_dual2(&vals, m)?;
            if c.mirror {
                let b = self.metric[c.j * m + c.i].eval_slots_dual2(&vals, m)?;
                a.value = 0.5 * (a.value + b.value);
                for (x, y) in a.grad.iter_mut().zip(&b.grad) {
                    *x = 0.5 * (*x + y);
                }
                for (x, y) in a.hess.iter_mut().zip(&b.hess) {
                    *x = 0.5 * (*x + y);
                }
            }
            g[c.i * m + c.j] = a.value;
            g[c.j * m + c.i] = a.value;
            for k in 0..m {
                dg[[k, c.i, c.j]] = a.grad[k];
                dg[[k, c.j, c.i]] = a.grad[k];
                for l in 0..m {
                    let h = a.hess[l * m + k];
                    ddg[[l, k, c.i, c.j]] = h;
                    ddg[[l, k, c.j, c.i]] = h;
                }
            }
        }
        Ok(MetricJet2 {
            g: SymMatrix::from_row_major(m, g)?,
            dg,
            ddg,
        })
    }

    /// `D[[k, i, j]] = d_k g_ij(p)`.
    pub fn metric_partials_at(&self, p: &Point) -> Result<Tensor> {
        Ok(self.jet1(p)?.dg)
    }

    /// `DD[[l, k, i, j]] = d_l d_k g_ij(p)`.
    pub fn metric_second_partials_at(&self, p: &Point) -> Result<Tensor> {
        Ok(self.jet2(p)?.ddg)
    }

    pub fn inverse_metric_at(&self, p: &Point) -> Result<SymMatrix> {
        linalg::invert_sym(&self.metric_at(p)?, DEFAULT_DEGENERACY_TOL)
    }

    fn check_vector(&self, comp: &[f64]) -> Result<()> {
        if comp.len() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                found: comp.len(),
            });
        }
        Ok(())
    }

    /// `<v, w> = sum_ij g_ij(p) v_i w_j`.
    pub fn inner_at(&self, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        if v.base != w.base {
            return Err(GeomError::BasePointMismatch);
        }
        self.check_vector(&v.comp)?;
        self.check_vector(&w.comp)?;
        Ok(self.metric_at(&v.base)?.bilinear(&v.comp, &w.comp))
    }

    pub fn flat_field_at(&self, v: &TangentVector) -> Result<Covector> {
        let g = self.metric_at(&v.base)?;
        linalg::invert_sym(&g, DEFAULT_DEGENERACY_TOL)?;
        Ok(Covector {
            base: v.base.clone(),
            comp: linalg::flat_components(&g, &v.comp)?,
        })
    }

    pub fn sharp_field_at(&self, omega: &Covector) -> Result<TangentVector> {
        let g_inv = self.inverse_metric_at(&omega.base)?;
        Ok(TangentVector {
            base: omega.base.clone(),
            comp: linalg::sharp_components(&g_inv, &omega.comp)?,
        })
    }

    /// `grad f` with components `sum_i ginv_ji d_i f`.
    pub fn gradient_at(&self, f: &Expr, p: &Point) -> Result<TangentVector> {
        let g_inv = self.inverse_metric_at(p)?;
        let df = f.eval_slots_dual1(&self.slot_values(p.coords()), self.dim())?;
        Ok(TangentVector {
            base: p.clone(),
            comp: linalg::sharp_components(&g_inv, &df.grad)?,
        })
    }

    /// Directional derivative `X f` at `p`.
    pub fn directional_derivative(&self, f: &Expr, x: &TangentVector) -> Result<f64> {
        self.check_point(&x.base)?;
        self.check_vector(&x.comp)?;
        let df = f.eval_slots_dual1(&self.slot_values(x.base.coords()), self.dim())?;
        Ok(df.grad.iter().zip(&x.comp).map(|(a, b)| a * b).sum())
    }

    /// Seeded sampling-based check of symmetry, non-degeneracy and constant index.
    pub fn validate(&self, n_samples: usize, seed: u64, tol: f64) -> ValidationReport {
        validate::validate_spec(self, n_samples, seed, tol)
    }
}
