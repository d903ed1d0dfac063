//! Riemann, Ricci and scalar curvature in coordinates, and the identities
//! they satisfy.
//!
//! `mixed[[n, i, j, k]]` holds `R(∂_i, ∂_j)∂_k = Σ_n R^n_{ijk} ∂_n` for the
//! curvature operator `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, and
//! `lowered[[i, j, k, l]] = ⟨R(∂_i, ∂_j)∂_k, ∂_l⟩`.

use crate::connection::{christoffel_at, christoffel_from_jet, covariant_differential_at, CovariantTensorField};
use crate::error::Result;
use crate::linalg::{self, SymMatrix, DEFAULT_DEGENERACY_TOL};
use crate::manifold::{MetricJet2, MetricSpec, Point, TangentVector};
use crate::rng::SplitMix64;
use crate::tensor::Tensor;
use crate::transport::{family_covderivs, parallel_transport, FamilySpec, ParamExprs, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannAt {
    pub base: Point,
    pub mixed: Tensor,
    pub lowered: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicciAt {
    pub base: Point,
    pub ric: SymMatrix,
    pub scalar: f64,
}

/// `dgamma[[l, n, j, k]] = ∂_l Γ^n_{jk}` from second-order metric data, using
/// `∂_l g̃ = −g̃ (∂_l g) g̃`.
pub fn christoffel_partials(jet: &MetricJet2, g_inv: &SymMatrix, gamma: &Tensor) -> Tensor {
    let m = jet.g.dim();
    let mut out = Tensor::zeros(m, 4);
    for l in 0..m {
        // ∂_l Γ_{μjk} = ½ (∂_l∂_j g_{μk} + ∂_l∂_k g_{jμ} − ∂_l∂_μ g_{kj})
        let mut d_first = Tensor::zeros(m, 3);
        for mu in 0..m {
            for j in 0..m {
                for k in j..m {
                    let v = 0.5
                        * (jet.ddg[[l, j, mu, k]] + jet.ddg[[l, k, j, mu]] - jet.ddg[[l, mu, k, j]]);
                    d_first[[mu, j, k]] = v;
                    d_first[[mu, k, j]] = v;
                }
            }
        }
        // ∂_l Γ^n_{jk} = Σ_μ g̃^{nμ} (∂_l Γ_{μjk} − Σ_ν ∂_l g_{μν} Γ^ν_{jk})
        for n in 0..m {
            for j in 0..m {
                for k in j..m {
                    let mut acc = 0.0;
                    for mu in 0..m {
                        let mut inner = d_first[[mu, j, k]];
                        for nu in 0..m {
                            inner -= jet.dg[[l, mu, nu]] * gamma[[nu, j, k]];
                        }
                        acc += g_inv.get(n, mu) * inner;
                    }
                    out[[l, n, j, k]] = acc;
                    out[[l, n, k, j]] = acc;
                }
            }
        }
    }
    out
}

/// Curvature components from a second-order metric jet.
pub fn riemann_from_jet(base: &Point, jet: &MetricJet2) -> Result<RiemannAt> {
    let m = jet.g.dim();
    let g_inv = linalg::invert_sym(&jet.g, DEFAULT_DEGENERACY_TOL)?;
    let gamma = christoffel_from_jet(&g_inv, &jet.dg);
    let dgamma = christoffel_partials(jet, &g_inv, &gamma);
    let mut mixed = Tensor::zeros(m, 4);
    for n in 0..m {
        for i in 0..m {
            for j in i + 1..m {
                for k in 0..m {
                    let mut v = dgamma[[i, n, j, k]] - dgamma[[j, n, i, k]];
                    for a in 0..m {
                        v += gamma[[a, j, k]] * gamma[[n, i, a]] - gamma[[a, i, k]] * gamma[[n, j, a]];
                    }
                    mixed[[n, i, j, k]] = v;
                    mixed[[n, j, i, k]] = -v;
                }
            }
        }
    }
    let mut lowered = Tensor::zeros(m, 4);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    lowered[[i, j, k, l]] = (0..m).map(|n| jet.g.get(l, n) * mixed[[n, i, j, k]]).sum();
                }
            }
        }
    }
    Ok(RiemannAt {
        base: base.clone(),
        mixed,
        lowered,
    })
}

pub fn riemann_at(spec: &MetricSpec, p: &Point) -> Result<RiemannAt> {
    riemann_from_jet(p, &spec.jet2(p)?)
}

impl RiemannAt {
    /// `R(x, y)z` from the mixed components, summing each antisymmetric pair
    /// `i < j` once so that swapping `x` and `y` negates the result exactly.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let m = self.mixed.dim();
        (0..m)
            .map(|n| {
                let mut acc = 0.0;
                for i in 0..m {
                    for j in i + 1..m {
                        let w = x[i] * y[j] - x[j] * y[i];
                        let mut inner = 0.0;
                        for k in 0..m {
                            inner += self.mixed[[n, i, j, k]] * z[k];
                        }
                        acc += w * inner;
                    }
                }
                acc
            })
            .collect()
    }

    /// `Ric_{jk} = Σ_i R^i_{ijk}`.
    pub fn ricci_components(&self) -> Vec<f64> {
        let m = self.mixed.dim();
        let mut ric = vec![0.0; m * m];
        for j in 0..m {
            for k in 0..m {
                ric[j * m + k] = (0..m).map(|i| self.mixed[[i, i, j, k]]).sum();
            }
        }
        ric
    }
}

pub fn curvature_apply_at(
    spec: &MetricSpec,
    p: &Point,
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Result<TangentVector> {
    for v in [x, y, z] {
        if v.len() != spec.dim() {
            return Err(crate::error::GeomError::DimensionMismatch {
                expected: spec.dim(),
                found: v.len(),
            });
        }
    }
    Ok(TangentVector::new(p.clone(), riemann_at(spec, p)?.apply(x, y, z)))
}

/// Ricci tensor as the trace `Ric(Y,Z) = tr(X ↦ R(X,Y)Z)` and scalar
/// curvature `S = Σ g̃^{ij} Ric_ij`.
pub fn ricci_at(spec: &MetricSpec, p: &Point) -> Result<RicciAt> {
    let jet = spec.jet2(p)?;
    let riem = riemann_from_jet(p, &jet)?;
    let m = spec.dim();
    let ric = SymMatrix::from_row_major(m, riem.ricci_components())?;
    let g_inv = linalg::invert_sym(&jet.g, DEFAULT_DEGENERACY_TOL)?;
    let mut scalar = 0.0;
    for i in 0..m {
        for j in 0..m {
            scalar += g_inv.get(i, j) * ric.get(i, j);
        }
    }
    Ok(RicciAt {
        base: p.clone(),
        ric,
        scalar,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IdentityResiduals {
    /// `max |R_ijkl + R_jikl|`
    pub antisym12: f64,
    /// `max |R_ijkl + R_ijlk|`
    pub antisym34: f64,
    /// `max |R_ijkl + R_jkil + R_kijl|`
    pub first_bianchi: f64,
    /// `max |R_ijkl − R_klij|`
    pub pair_symmetry: f64,
    /// `max |R_ijkl|`, the component scale the residuals compare against.
    pub scale: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.antisym12
            .max(self.antisym34)
            .max(self.first_bianchi)
            .max(self.pair_symmetry)
    }
}

pub fn identity_residuals_of(r: &Tensor) -> IdentityResiduals {
    let m = r.dim();
    let mut res = IdentityResiduals {
        scale: r.max_abs(),
        ..Default::default()
    };
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let v = r[[i, j, k, l]];
                    res.antisym12 = res.antisym12.max((v + r[[j, i, k, l]]).abs());
                    res.antisym34 = res.antisym34.max((v + r[[i, j, l, k]]).abs());
                    res.first_bianchi = res
                        .first_bianchi
                        .max((v + r[[j, k, i, l]] + r[[k, i, j, l]]).abs());
                    res.pair_symmetry = res.pair_symmetry.max((v - r[[k, l, i, j]]).abs());
                }
            }
        }
    }
    res
}

pub fn identity_residuals(spec: &MetricSpec, p: &Point) -> Result<IdentityResiduals> {
    Ok(identity_residuals_of(&riemann_at(spec, p)?.lowered))
}

/// The lowered Riemann tensor as a rank-4 covariant field (partials by
/// central differences).
#[derive(Debug, Clone, Copy, Default)]
pub struct RiemannField;

impl CovariantTensorField for RiemannField {
    fn rank(&self) -> usize {
        4
    }

    fn at(&self, spec: &MetricSpec, p: &Point) -> Result<Tensor> {
        Ok(riemann_at(spec, p)?.lowered)
    }
}

/// `max |(∇_i R)_{jk··} + (∇_j R)_{ki··} + (∇_k R)_{ij··}|` with `∇R` from
/// central differences of step `fd_step`.
pub fn second_bianchi_residual(spec: &MetricSpec, p: &Point, fd_step: f64) -> Result<f64> {
    let m = spec.dim();
    let d = covariant_differential_at(spec, &RiemannField, p, fd_step)?;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        let s = d[[j, k, a, b, i]] + d[[k, i, a, b, j]] + d[[i, j, a, b, k]];
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// The all-finite-difference route: `∂g` by central differences of
/// `metric_at`, `Γ` from those, and `∂Γ` by central differences of `Γ`.
/// Independent of the dual-number pipeline; used as a cross-check.
pub fn riemann_finite_difference(spec: &MetricSpec, p: &Point, h: f64) -> Result<Tensor> {
    let m = spec.dim();
    let gamma_at = |x: &[f64]| -> Result<Tensor> {
        let pt = Point::new(x.to_vec());
        let g = spec.metric_at(&pt)?;
        let mut dg = Tensor::zeros(m, 3);
        for k in 0..m {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            let gp = spec.metric_at(&Point::new(xp))?;
            let gm = spec.metric_at(&Point::new(xm))?;
            for i in 0..m {
                for j in 0..m {
                    dg[[k, i, j]] = (gp.get(i, j) - gm.get(i, j)) / (2.0 * h);
                }
            }
        }
        let g_inv = linalg::invert_sym(&g, DEFAULT_DEGENERACY_TOL)?;
        Ok(christoffel_from_jet(&g_inv, &dg))
    };
    let x = p.coords();
    let gamma = gamma_at(x)?;
    let mut dgamma = Tensor::zeros(m, 4);
    for l in 0..m {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[l] += h;
        xm[l] -= h;
        let gp = gamma_at(&xp)?;
        let gm = gamma_at(&xm)?;
        for (c, (a, b)) in gp.as_slice().iter().zip(gm.as_slice()).enumerate() {
            dgamma.as_mut_slice()[l * m * m * m + c] = (a - b) / (2.0 * h);
        }
    }
    let g = spec.metric_at(p)?;
    Ok(Tensor::from_fn(m, 4, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        (0..m)
            .map(|n| {
                let mut v = dgamma[[i, n, j, k]] - dgamma[[j, n, i, k]];
                for a in 0..m {
                    v += gamma[[a, j, k]] * gamma[[n, i, a]] - gamma[[a, i, k]] * gamma[[n, j, a]];
                }
                g.get(l, n) * v
            })
            .sum()
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinReport {
    pub is_einstein: bool,
    /// Mean of `S / m` over the samples.
    pub kappa_estimate: f64,
    /// `max ‖Ric − κ g‖_∞` over the samples.
    pub max_deviation: f64,
    /// Smallest and largest eigenvalue of `Ric − κ g` seen over the samples.
    pub ric_minus_kg_eigen_range: (f64, f64),
    /// Samples whose evaluation failed.
    pub failures: usize,
}

/// Samples the domain's sampling box and tests `Ric = κ g`.
pub fn einstein_check(spec: &MetricSpec, n_samples: usize, seed: u64, tol: f64) -> EinsteinReport {
    let m = spec.dim();
    let (lo, hi) = spec.domain().sampling_box();
    let mut rng = SplitMix64::new(seed);
    let mut samples = Vec::with_capacity(n_samples);
    let mut failures = 0;
    for _ in 0..n_samples {
        let p = Point::new((0..m).map(|k| rng.uniform_open(lo[k], hi[k])).collect::<Vec<_>>());
        match (spec.metric_at(&p), ricci_at(spec, &p)) {
            (Ok(g), Ok(r)) => samples.push((g, r)),
            _ => failures += 1,
        }
    }
    if samples.is_empty() {
        return EinsteinReport {
            is_einstein: false,
            kappa_estimate: f64::NAN,
            max_deviation: f64::NAN,
            ric_minus_kg_eigen_range: (f64::NAN, f64::NAN),
            failures,
        };
    }
    let kappa = samples.iter().map(|(_, r)| r.scalar / m as f64).sum::<f64>() / samples.len() as f64;
    let mut max_deviation: f64 = 0.0;
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for (g, r) in &samples {
        let diff = SymMatrix::from_fn(m, |i, j| r.ric.get(i, j) - kappa * g.get(i, j));
        max_deviation = max_deviation.max(diff.max_abs());
        for l in linalg::jacobi_eigen(&diff).values {
            range.0 = range.0.min(l);
            range.1 = range.1.max(l);
        }
    }
    EinsteinReport {
        is_einstein: failures == 0 && max_deviation <= tol,
        kappa_estimate: kappa,
        max_deviation,
        ric_minus_kg_eigen_range: range,
        failures,
    }
}

/// Holonomy around the family rectangle `[0, δ1] x [0, δ2]`, scaled by its
/// area: `(P4 P3 P2 P1 z − z) / (δ1 δ2)` where the transports run along
/// `t ↦ Γ(0, t)` from `0` to `δ2`, then `s ↦ Γ(s, δ2)` from `0` to `δ1`, then
/// `t ↦ Γ(δ1, t)` from `δ2` back to `0`, then `s ↦ Γ(s, 0)` from `δ1` back to
/// `0`. It approaches `R(∂_s Γ, ∂_t Γ) z` at `Γ(0, 0)` with error `O(δ)`.
pub fn holonomy_curvature_estimate(
    spec: &MetricSpec,
    fam: &FamilySpec,
    z: &[f64],
    delta1: f64,
    delta2: f64,
    cfg: &SolverConfig,
) -> Result<TangentVector> {
    fam.check(0.0, 0.0)?;
    fam.check(delta1, delta2)?;
    let base = Point::new(fam.jet(0.0, 0.0)?.0);
    let v = parallel_transport(spec, &fam.longitudinal(0.0)?, 0.0, delta2, z, cfg)?;
    let v = parallel_transport(spec, &fam.transverse(delta2)?, 0.0, delta1, &v, cfg)?;
    let v = parallel_transport(spec, &fam.longitudinal(delta1)?, delta2, 0.0, &v, cfg)?;
    let v = parallel_transport(spec, &fam.transverse(0.0)?, delta1, 0.0, &v, cfg)?;
    let area = delta1 * delta2;
    Ok(TangentVector::new(
        base,
        v.iter().zip(z).map(|(a, b)| (a - b) / area).collect::<Vec<_>>(),
    ))
}

/// Step of the nested central differences in [`commutator_curvature_check`].
pub const COMMUTATOR_STEP: f64 = 1e-4;

/// `max_i |(D1 D2 W − D2 D1 W − R(∂_s Γ, ∂_t Γ) W)^i|` at `(s, t)`, with the
/// outer derivatives taken by central differences of step `h`.
pub fn commutator_curvature_residual(
    spec: &MetricSpec,
    fam: &FamilySpec,
    field: &ParamExprs,
    s: f64,
    t: f64,
    h: f64,
) -> Result<f64> {
    let (x, xs, xt) = fam.jet(s, t)?;
    let p = Point::new(x);
    let gamma = christoffel_at(spec, &p)?;
    let (d1w, d2w) = family_covderivs(spec, fam, field, s, t)?;
    let d2w_s = |ds: f64| family_covderivs(spec, fam, field, s + ds, t).map(|r| r.1.comp);
    let d1w_t = |dt: f64| family_covderivs(spec, fam, field, s, t + dt).map(|r| r.0.comp);
    let (a_plus, a_minus) = (d2w_s(h)?, d2w_s(-h)?);
    let (b_plus, b_minus) = (d1w_t(h)?, d1w_t(-h)?);
    let corr_a = gamma.contract(&xs, &d2w.comp);
    let corr_b = gamma.contract(&xt, &d1w.comp);
    let w = field.value(&[s, t])?;
    let rw = riemann_at(spec, &p)?.apply(&xs, &xt, &w);
    let mut worst: f64 = 0.0;
    for i in 0..spec.dim() {
        let d1d2 = (a_plus[i] - a_minus[i]) / (2.0 * h) - corr_a[i];
        let d2d1 = (b_plus[i] - b_minus[i]) / (2.0 * h) - corr_b[i];
        worst = worst.max((d1d2 - d2d1 - rw[i]).abs());
    }
    Ok(worst)
}

/// [`commutator_curvature_residual`] with the default step.
pub fn commutator_curvature_check(
    spec: &MetricSpec,
    fam: &FamilySpec,
    field: &ParamExprs,
    s: f64,
    t: f64,
) -> Result<f64> {
    commutator_curvature_residual(spec, fam, field, s, t, COMMUTATOR_STEP)
}
