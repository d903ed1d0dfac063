//! The Levi-Civita connection in coordinates.
//!
//! Christoffel symbols are stored as `gamma[[i, j, k]] = Γ^i_{jk}` with
//! `∇_{∂_k} ∂_j = Σ_i Γ^i_{jk} ∂_i`.

use crate::error::{GeomError, Result};
use crate::expr::Expr;
use crate::linalg::{self, SymMatrix, DEFAULT_DEGENERACY_TOL};
use crate::manifold::{MetricSpec, Point, TangentVector};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelAt {
    pub base: Point,
    pub gamma: Tensor,
}

impl ChristoffelAt {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[[i, j, k]]
    }

    /// `-Σ_{j,k} Γ^i_{jk} u_j w_k`.
    pub fn contract(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let m = self.gamma.dim();
        (0..m)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..m {
                    for k in 0..m {
                        acc += self.gamma[[i, j, k]] * u[j] * w[k];
                    }
                }
                -acc
            })
            .collect()
    }
}

/// Christoffel symbols of the first kind,
/// `first[[μ, j, k]] = ½ (∂_j g_{μk} + ∂_k g_{jμ} − ∂_μ g_{kj})`, from
/// `dg[[k, i, j]] = ∂_k g_ij`.
pub fn christoffel_first_kind(dg: &Tensor) -> Tensor {
    let m = dg.dim();
    let mut first = Tensor::zeros(m, 3);
    for mu in 0..m {
        for j in 0..m {
            for k in j..m {
                let v = 0.5 * (dg[[j, mu, k]] + dg[[k, j, mu]] - dg[[mu, k, j]]);
                first[[mu, j, k]] = v;
                first[[mu, k, j]] = v;
            }
        }
    }
    first
}

/// `Γ^i_{jk} = Σ_μ g̃^{iμ} Γ_{μjk}`, built for `j <= k` and mirrored.
pub fn christoffel_from_jet(g_inv: &SymMatrix, dg: &Tensor) -> Tensor {
    let m = dg.dim();
    let first = christoffel_first_kind(dg);
    let mut gamma = Tensor::zeros(m, 3);
    for i in 0..m {
        for j in 0..m {
            for k in j..m {
                let v: f64 = (0..m).map(|mu| g_inv.get(i, mu) * first[[mu, j, k]]).sum();
                gamma[[i, j, k]] = v;
                gamma[[i, k, j]] = v;
            }
        }
    }
    gamma
}

pub fn christoffel_at(spec: &MetricSpec, p: &Point) -> Result<ChristoffelAt> {
    let jet = spec.jet1(p)?;
    let g_inv = linalg::invert_sym(&jet.g, DEFAULT_DEGENERACY_TOL)?;
    Ok(ChristoffelAt {
        base: p.clone(),
        gamma: christoffel_from_jet(&g_inv, &jet.dg),
    })
}

/// `max |Γ^i_{jk} − Γ^i_{kj}|`.
pub fn torsion_residual(spec: &MetricSpec, p: &Point) -> Result<f64> {
    let c = christoffel_at(spec, p)?;
    let m = spec.dim();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                worst = worst.max((c.gamma[[i, j, k]] - c.gamma[[i, k, j]]).abs());
            }
        }
    }
    Ok(worst)
}

/// A vector field on the chart given by one expression per coordinate
/// direction, over the coordinates and parameters of a spec.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn parse(spec: &MetricSpec, comps: &[&str]) -> Result<Self> {
        if comps.len() != spec.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: spec.dim(),
                found: comps.len(),
            });
        }
        let comps = comps
            .iter()
            .map(|c| spec.parse_scalar(c))
            .collect::<Result<_>>()?;
        Ok(VectorField { comps })
    }

    /// Constant coordinate field `∂_k`.
    pub fn coordinate(spec: &MetricSpec, k: usize) -> Self {
        VectorField {
            comps: (0..spec.dim())
                .map(|i| Expr::constant(if i == k { 1.0 } else { 0.0 }))
                .collect(),
        }
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn at(&self, spec: &MetricSpec, p: &Point) -> Result<Vec<f64>> {
        spec.check_point(p)?;
        let vals = spec.slot_values(p.coords());
        self.comps.iter().map(|e| e.eval_slots_real(&vals)).collect()
    }

    /// Values `Y^i` and partials `d[i][k] = ∂_k Y^i`.
    pub fn jet_at(&self, spec: &MetricSpec, p: &Point) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        spec.check_point(p)?;
        let vals = spec.slot_values(p.coords());
        let mut value = Vec::with_capacity(self.comps.len());
        let mut d = Vec::with_capacity(self.comps.len());
        for e in &self.comps {
            let y = e.eval_slots_dual1(&vals, spec.dim())?;
            value.push(y.value);
            d.push(y.grad);
        }
        Ok((value, d))
    }
}

fn covderiv_from_parts(
    gamma: &ChristoffelAt,
    x: &[f64],
    y: &[f64],
    dy: &[Vec<f64>],
) -> Vec<f64> {
    let m = x.len();
    let correction = gamma.contract(y, x);
    (0..m)
        .map(|i| {
            let directional: f64 = (0..m).map(|k| x[k] * dy[i][k]).sum();
            directional - correction[i]
        })
        .collect()
}

/// `(∇_X Y)^i = Σ_k X^k ∂_k Y^i + Σ_{j,k} X^k Γ^i_{jk} Y^j`.
pub fn covderiv_vector_field_at(
    spec: &MetricSpec,
    x: &VectorField,
    y: &VectorField,
    p: &Point,
) -> Result<TangentVector> {
    let gamma = christoffel_at(spec, p)?;
    let xv = x.at(spec, p)?;
    let (yv, dy) = y.jet_at(spec, p)?;
    Ok(TangentVector::new(
        p.clone(),
        covderiv_from_parts(&gamma, &xv, &yv, &dy),
    ))
}

/// Both sides of the Koszul formula at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KoszulSides {
    /// `2⟨∇_X Y, Z⟩` from the Christoffel symbols.
    pub lhs: f64,
    /// `X⟨Y,Z⟩ + Y⟨Z,X⟩ − Z⟨X,Y⟩ − ⟨X,[Y,Z]⟩ + ⟨Y,[Z,X]⟩ + ⟨Z,[X,Y]⟩`.
    pub rhs: f64,
    /// Largest magnitude among the individual terms.
    pub scale: f64,
}

impl KoszulSides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

pub fn koszul_sides(
    spec: &MetricSpec,
    x: &VectorField,
    y: &VectorField,
    z: &VectorField,
    p: &Point,
) -> Result<KoszulSides> {
    let m = spec.dim();
    let jet = spec.jet1(p)?;
    let (xv, dx) = x.jet_at(spec, p)?;
    let (yv, dy) = y.jet_at(spec, p)?;
    let (zv, dz) = z.jet_at(spec, p)?;
    let g = &jet.g;

    // A⟨B,C⟩ = Σ_k A^k ∂_k (g_ij B^i C^j)
    let deriv_product = |a: &[f64], b: &[f64], db: &[Vec<f64>], c: &[f64], dc: &[Vec<f64>]| {
        let mut acc = 0.0;
        for k in 0..m {
            let mut d = 0.0;
            for i in 0..m {
                for j in 0..m {
                    d += jet.dg[[k, i, j]] * b[i] * c[j]
                        + g.get(i, j) * (db[i][k] * c[j] + b[i] * dc[j][k]);
                }
            }
            acc += a[k] * d;
        }
        acc
    };
    let bracket = |a: &[f64], da: &[Vec<f64>], b: &[f64], db: &[Vec<f64>]| -> Vec<f64> {
        (0..m)
            .map(|i| (0..m).map(|k| a[k] * db[i][k] - b[k] * da[i][k]).sum())
            .collect()
    };

    let terms = [
        deriv_product(&xv, &yv, &dy, &zv, &dz),
        deriv_product(&yv, &zv, &dz, &xv, &dx),
        -deriv_product(&zv, &xv, &dx, &yv, &dy),
        -g.bilinear(&xv, &bracket(&yv, &dy, &zv, &dz)),
        g.bilinear(&yv, &bracket(&zv, &dz, &xv, &dx)),
        g.bilinear(&zv, &bracket(&xv, &dx, &yv, &dy)),
    ];
    let rhs: f64 = terms.iter().sum();

    let g_inv = linalg::invert_sym(g, DEFAULT_DEGENERACY_TOL)?;
    let gamma = ChristoffelAt {
        base: p.clone(),
        gamma: christoffel_from_jet(&g_inv, &jet.dg),
    };
    let nabla = covderiv_from_parts(&gamma, &xv, &yv, &dy);
    let lhs = 2.0 * g.bilinear(&nabla, &zv);
    let scale = terms.iter().fold(lhs.abs(), |acc, t| acc.max(t.abs()));
    Ok(KoszulSides { lhs, rhs, scale })
}

/// `|2⟨∇_X Y, Z⟩ − RHS|` of the Koszul formula.
pub fn koszul_residual(
    spec: &MetricSpec,
    x: &VectorField,
    y: &VectorField,
    z: &VectorField,
    p: &Point,
) -> Result<f64> {
    Ok(koszul_sides(spec, x, y, z, p)?.residual())
}

/// A field of fully covariant rank-`r` tensors on the chart.
pub trait CovariantTensorField {
    fn rank(&self) -> usize;

    /// Components `T_{i1..ir}` at `p`.
    fn at(&self, spec: &MetricSpec, p: &Point) -> Result<Tensor>;

    /// Exact partials `D[[i1, .., ir, k]] = ∂_k T_{i1..ir}` when available;
    /// `None` falls back to central differences.
    fn partials_at(&self, _spec: &MetricSpec, _p: &Point) -> Option<Result<Tensor>> {
        None
    }
}

/// The metric itself as a rank-2 covariant field (exact partials).
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricField;

impl CovariantTensorField for MetricField {
    fn rank(&self) -> usize {
        2
    }

    fn at(&self, spec: &MetricSpec, p: &Point) -> Result<Tensor> {
        let g = spec.metric_at(p)?;
        Ok(Tensor::from_fn(spec.dim(), 2, |ix| g.get(ix[0], ix[1])))
    }

    fn partials_at(&self, spec: &MetricSpec, p: &Point) -> Option<Result<Tensor>> {
        Some(
            spec.metric_partials_at(p)
                .map(|dg| Tensor::from_fn(spec.dim(), 3, |ix| dg[[ix[2], ix[0], ix[1]]])),
        )
    }
}

/// A covariant tensor field with closed-form component expressions, listed in
/// row-major index order (exact partials).
#[derive(Debug, Clone)]
pub struct ExprTensorField {
    rank: usize,
    comps: Vec<Expr>,
}

impl ExprTensorField {
    pub fn parse(spec: &MetricSpec, rank: usize, comps: &[&str]) -> Result<Self> {
        let expected = spec.dim().pow(rank as u32);
        if comps.len() != expected {
            return Err(GeomError::DimensionMismatch {
                expected,
                found: comps.len(),
            });
        }
        Ok(ExprTensorField {
            rank,
            comps: comps
                .iter()
                .map(|c| spec.parse_scalar(c))
                .collect::<Result<_>>()?,
        })
    }
}

impl CovariantTensorField for ExprTensorField {
    fn rank(&self) -> usize {
        self.rank
    }

    fn at(&self, spec: &MetricSpec, p: &Point) -> Result<Tensor> {
        spec.check_point(p)?;
        let vals = spec.slot_values(p.coords());
        let mut t = Tensor::zeros(spec.dim(), self.rank);
        for (slot, e) in t.as_mut_slice().iter_mut().zip(&self.comps) {
            *slot = e.eval_slots_real(&vals)?;
        }
        Ok(t)
    }

    fn partials_at(&self, spec: &MetricSpec, p: &Point) -> Option<Result<Tensor>> {
        let run = || -> Result<Tensor> {
            spec.check_point(p)?;
            let m = spec.dim();
            let vals = spec.slot_values(p.coords());
            let mut d = Tensor::zeros(m, self.rank + 1);
            let out = d.as_mut_slice();
            for (c, e) in self.comps.iter().enumerate() {
                let v = e.eval_slots_dual1(&vals, m)?;
                out[c * m..(c + 1) * m].copy_from_slice(&v.grad);
            }
            Ok(d)
        };
        Some(run())
    }
}

/// Central-difference partials `D[[.., k]]` of a field with step `h`.
pub fn central_partials<T: CovariantTensorField + ?Sized>(
    field: &T,
    spec: &MetricSpec,
    p: &Point,
    h: f64,
) -> Result<Tensor> {
    let m = spec.dim();
    let r = field.rank();
    let mut d = Tensor::zeros(m, r + 1);
    for k in 0..m {
        let shifted = |sign: f64| -> Result<Tensor> {
            let mut x = p.coords().to_vec();
            x[k] += sign * h;
            if !spec.domain().contains(&x) {
                return Err(GeomError::StepTooLarge { step: h, point: x });
            }
            field.at(spec, &Point::new(x))
        };
        let plus = shifted(1.0)?;
        let minus = shifted(-1.0)?;
        let out = d.as_mut_slice();
        for (c, (a, b)) in plus.as_slice().iter().zip(minus.as_slice()).enumerate() {
            out[c * m + k] = (a - b) / (2.0 * h);
        }
    }
    Ok(d)
}

/// Total covariant differential `(∇T)[[i1, .., ir, k]] = (∇_{∂_k} T)_{i1..ir}
/// = ∂_k T_{i1..ir} − Σ_a Σ_μ Γ^μ_{i_a k} T_{i1..μ..ir}`.
pub fn covariant_differential_at<T: CovariantTensorField + ?Sized>(
    spec: &MetricSpec,
    field: &T,
    p: &Point,
    fd_step: f64,
) -> Result<Tensor> {
    let m = spec.dim();
    let r = field.rank();
    let gamma = christoffel_at(spec, p)?;
    let t = field.at(spec, p)?;
    let mut d = match field.partials_at(spec, p) {
        Some(exact) => exact?,
        None => central_partials(field, spec, p, fd_step)?,
    };
    let mut idx = vec![0usize; r + 1];
    for flat in 0..d.as_slice().len() {
        let mut rest = flat;
        for pos in (0..=r).rev() {
            idx[pos] = rest % m;
            rest /= m;
        }
        let k = idx[r];
        let mut corr = 0.0;
        let mut tidx = idx[..r].to_vec();
        for a in 0..r {
            let orig = tidx[a];
            for mu in 0..m {
                tidx[a] = mu;
                corr += gamma.gamma[[mu, orig, k]] * t.get(&tidx);
            }
            tidx[a] = orig;
        }
        d.as_mut_slice()[flat] -= corr;
    }
    Ok(d)
}

/// `(∇_X T)_{i1..ir}`: the covariant differential contracted with `X^k`.
pub fn covderiv_tensor_r0_at<T: CovariantTensorField + ?Sized>(
    spec: &MetricSpec,
    field: &T,
    x: &VectorField,
    p: &Point,
    fd_step: f64,
) -> Result<Tensor> {
    let m = spec.dim();
    let nabla = covariant_differential_at(spec, field, p, fd_step)?;
    let xv = x.at(spec, p)?;
    let mut out = Tensor::zeros(m, field.rank());
    for (c, slot) in out.as_mut_slice().iter_mut().enumerate() {
        *slot = (0..m).map(|k| nabla.as_slice()[c * m + k] * xv[k]).sum();
    }
    Ok(out)
}
