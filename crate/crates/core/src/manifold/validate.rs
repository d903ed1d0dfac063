use super::MetricSpec;
use crate::error::{GeomError, Result};
use crate::linalg::{self, SymMatrix};
use crate::rng::SplitMix64;

/// Relative tolerance for `g_ij` against `g_ji`.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum FailureKind {
    /// A component could not be evaluated.
    Evaluation(GeomError),
    Symmetry { i: usize, j: usize, gij: f64, gji: f64 },
    Degenerate { min_abs_eigenvalue: f64 },
    /// The index differs from the one seen at the first good sample.
    IndexChange { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleFailure {
    pub sample: usize,
    pub point: Vec<f64>,
    pub kind: FailureKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n_samples: usize,
    /// Largest relative asymmetry `|g_ij - g_ji| / max(1, |g_ij|)`.
    pub symmetry_max: f64,
    pub min_abs_eigenvalue: f64,
    /// The index shared by every sample, if there is one.
    pub index: Option<usize>,
    pub failures: Vec<SampleFailure>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    /// The first failure as an error, or the constant index.
    pub fn into_result(self) -> Result<usize> {
        match self.failures.into_iter().next() {
            None => self
                .index
                .ok_or_else(|| GeomError::InvalidArgument("no samples were drawn".into())),
            Some(f) => Err(match f.kind {
                FailureKind::Evaluation(e) => e,
                FailureKind::Symmetry { i, j, gij, gji } => GeomError::Symmetry { i, j, gij, gji },
                FailureKind::Degenerate { min_abs_eigenvalue } => GeomError::DegenerateMetric(
                    format!(
                        "smallest |eigenvalue| {min_abs_eigenvalue:e} at {:?}",
                        f.point
                    ),
                ),
                FailureKind::IndexChange { expected, found } => GeomError::NonConstantIndex {
                    first: expected,
                    second: found,
                },
            }),
        }
    }
}

fn worst_asymmetry(m: usize, raw: &[f64]) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (raw[i * m + j], raw[j * m + i]);
            let rel = (a - b).abs() / a.abs().max(1.0);
            if rel > worst.0 {
                worst = (rel, i, j);
            }
        }
    }
    worst
}

/// Samples `n_samples` points uniformly in the domain's sampling box and
/// checks symmetry, non-degeneracy and constancy of the index.
pub fn validate_spec(spec: &MetricSpec, n_samples: usize, seed: u64, tol: f64) -> ValidationReport {
    let m = spec.dim();
    let (lo, hi) = spec.domain().sampling_box();
    let mut rng = SplitMix64::new(seed);
    let mut report = ValidationReport {
        n_samples,
        symmetry_max: 0.0,
        min_abs_eigenvalue: f64::INFINITY,
        index: None,
        failures: Vec::new(),
    };
    let mut first_index = None;
    let mut index_consistent = true;
    for sample in 0..n_samples {
        let x: Vec<f64> = (0..m).map(|k| rng.uniform_open(lo[k], hi[k])).collect();
        let fail = |kind| SampleFailure {
            sample,
            point: x.clone(),
            kind,
        };
        let raw = match spec.raw_components(&x) {
            Ok(raw) => raw,
            Err(e) => {
                report.failures.push(fail(FailureKind::Evaluation(e)));
                continue;
            }
        };
        let (rel, i, j) = worst_asymmetry(m, &raw);
        report.symmetry_max = report.symmetry_max.max(rel);
        if rel > SYMMETRY_TOL {
            report.failures.push(fail(FailureKind::Symmetry {
                i,
                j,
                gij: raw[i * m + j],
                gji: raw[j * m + i],
            }));
            continue;
        }
        let g = match SymMatrix::from_row_major(m, raw) {
            Ok(g) => g,
            Err(e) => {
                report.failures.push(fail(FailureKind::Evaluation(e)));
                continue;
            }
        };
        let eig = linalg::jacobi_eigen(&g);
        let min_abs = eig.values.iter().fold(f64::INFINITY, |acc, l| acc.min(l.abs()));
        report.min_abs_eigenvalue = report.min_abs_eigenvalue.min(min_abs);
        if !(min_abs > tol) {
            report.failures.push(fail(FailureKind::Degenerate {
                min_abs_eigenvalue: min_abs,
            }));
            continue;
        }
        let index = eig.values.iter().filter(|l| **l < 0.0).count();
        match first_index {
            None => first_index = Some(index),
            Some(expected) if expected != index => {
                index_consistent = false;
                report.failures.push(fail(FailureKind::IndexChange {
                    expected,
                    found: index,
                }));
            }
            Some(_) => {}
        }
    }
    if index_consistent {
        report.index = first_index;
    }
    report
}
