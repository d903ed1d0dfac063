//! Small dense symmetric matrices: the component form of a scalar product at
//! a point.

use crate::error::{GeomError, Result};

/// Default threshold below which an eigenvalue (or determinant) counts as zero.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Square symmetric matrix, row-major. Construction averages `a[i][j]` and
/// `a[j][i]`, so the stored entries are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(GeomError::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        let mut m = SymMatrix { dim, data };
        for i in 0..dim {
            for j in i + 1..dim {
                let avg = 0.5 * (m.data[i * dim + j] + m.data[j * dim + i]);
                m.data[i * dim + j] = avg;
                m.data[j * dim + i] = avg;
            }
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self::from_row_major(dim, data).expect("sizes agree")
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn diag(entries: &[f64]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// `v^T A w`.
    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.get(i, j) * v[i] * w[j];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Inverse of a symmetric matrix by Gauss-Jordan elimination with partial
/// pivoting. Fails with `DegenerateMetric` when `|det| <= tol`.
pub fn invert_sym(g: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let n = g.dim;
    let mut a = g.data.clone();
    let mut inv = SymMatrix::identity(n).data;
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .expect("non-empty range");
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        if p == 0.0 {
            break;
        }
        for k in 0..n {
            a[col * n + k] /= p;
            inv[col * n + k] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r * n + col];
            if factor != 0.0 {
                for k in 0..n {
                    a[r * n + k] -= factor * a[col * n + k];
                    inv[r * n + k] -= factor * inv[col * n + k];
                }
            }
        }
    }
    if !(det.abs() > tol) {
        return Err(GeomError::DegenerateMetric(format!(
            "determinant {det:e} is within {tol:e} of zero"
        )));
    }
    SymMatrix::from_row_major(n, inv)
}

/// Eigenvalues and eigenvectors from the cyclic Jacobi iteration.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Row-major; column `k` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
}

pub fn jacobi_eigen(g: &SymMatrix) -> Eigen {
    let n = g.dim;
    let mut a = g.data.clone();
    let mut v = SymMatrix::identity(n).data;
    let scale = g.data.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Eigen {
        values: (0..n).map(|i| a[i * n + i]).collect(),
        vectors: v,
    }
}

fn check_nondegenerate(eig: &Eigen, tol: f64) -> Result<()> {
    match eig.values.iter().find(|l| !(l.abs() > tol)) {
        Some(l) => Err(GeomError::DegenerateMetric(format!(
            "eigenvalue {l:e} is within {tol:e} of zero"
        ))),
        None => Ok(()),
    }
}

/// Number of negative directions of the scalar product `g`.
pub fn index_of(g: &SymMatrix, tol: f64) -> Result<usize> {
    let eig = jacobi_eigen(g);
    check_nondegenerate(&eig, tol)?;
    Ok(eig.values.iter().filter(|l| **l < 0.0).count())
}

/// A basis with `B^T g B = diag(signs)`, negative directions first.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    dim: usize,
    /// Row-major; column `k` is the `k`-th basis vector.
    pub basis: Vec<f64>,
    pub signs: Vec<f64>,
}

impl OrthonormalBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.basis[i * self.dim + k]).collect()
    }

    pub fn index(&self) -> usize {
        self.signs.iter().filter(|s| **s < 0.0).count()
    }
}

pub fn orthonormal_basis(g: &SymMatrix, tol: f64) -> Result<OrthonormalBasis> {
    let n = g.dim;
    let eig = jacobi_eigen(g);
    check_nondegenerate(&eig, tol)?;
    let mut order: Vec<usize> = (0..n).collect();
    // stable: keeps eigen order within each sign class
    order.sort_by_key(|&k| eig.values[k] > 0.0);
    let mut basis = vec![0.0; n * n];
    let mut signs = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        let lambda = eig.values[k];
        let scale = 1.0 / lambda.abs().sqrt();
        for i in 0..n {
            basis[i * n + col] = eig.vectors[i * n + k] * scale;
        }
        signs.push(lambda.signum());
    }
    Ok(OrthonormalBasis {
        dim: n,
        basis,
        signs,
    })
}

/// Determinant of a general row-major `n x n` matrix by Gaussian elimination
/// with partial pivoting.
pub fn determinant(n: usize, data: &[f64]) -> f64 {
    assert_eq!(data.len(), n * n, "determinant needs a square matrix");
    let mut a = data.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .unwrap_or(col);
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
        }
    }
    det
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(GeomError::DimensionMismatch { expected, found })
    }
}

/// Lowers an index: `omega_j = sum_i g_ij v_i`.
pub fn flat_components(g: &SymMatrix, v: &[f64]) -> Result<Vec<f64>> {
    check_len(g.dim, v.len())?;
    Ok((0..g.dim)
        .map(|j| (0..g.dim).map(|i| g.get(i, j) * v[i]).sum())
        .collect())
}

/// Raises an index with the inverse matrix: `v_j = sum_i ginv_ji omega_i`.
pub fn sharp_components(g_inv: &SymMatrix, omega: &[f64]) -> Result<Vec<f64>> {
    check_len(g_inv.dim, omega.len())?;
    Ok(g_inv.mat_vec(omega))
}
