mod common;

use common::{halfplane, presets, schwarzschild, skewed, sphere};
use geom_core::verify::{run_verify, VerifyConfig};

fn cfg(samples: usize, seed: u64) -> VerifyConfig {
    VerifyConfig { samples, seed, ..VerifyConfig::default() }
}

#[test]
fn every_preset_passes() {
    for (spec, _) in presets() {
        let report = run_verify(&spec, &cfg(12, 1));
        let failing: Vec<_> = report.failing().map(|c| (c.name, c.residual, c.threshold)).collect();
        assert!(report.passed(), "{}: {failing:?}", spec.name());
    }
}

#[test]
fn non_diagonal_chart_passes() {
    let report = run_verify(&skewed(), &cfg(12, 2));
    let failing: Vec<_> = report.failing().map(|c| (c.name, c.residual)).collect();
    assert!(report.passed(), "{failing:?}");
}

#[test]
fn report_is_reproducible() {
    let a = run_verify(&halfplane(), &cfg(10, 7));
    let b = run_verify(&halfplane(), &cfg(10, 7));
    assert_eq!(a, b);
    let c = run_verify(&halfplane(), &cfg(10, 8));
    assert_ne!(a, c);
}

#[test]
fn einstein_check_is_informational() {
    let report = run_verify(&schwarzschild(1.0), &cfg(6, 0));
    let e = report.checks.iter().find(|c| c.name == "einstein").unwrap();
    assert!(e.informational && e.passed);
    let report = run_verify(&skewed(), &cfg(6, 0));
    let e = report.checks.iter().find(|c| c.name == "einstein").unwrap();
    assert!(e.informational);
}

#[test]
fn zero_tolerance_fails_with_named_checks() {
    let report = run_verify(&sphere(1.0), &VerifyConfig { tol: 0.0, ..cfg(5, 0) });
    assert!(!report.passed());
    let names: Vec<_> = report.failing().map(|c| c.name).collect();
    assert!(names.contains(&"holonomy_convergence"), "{names:?}");
    assert!(!names.contains(&"torsion"));
}

#[test]
fn thresholds_scale_with_tolerance() {
    let a = run_verify(&sphere(1.0), &cfg(3, 0));
    let b = run_verify(&sphere(1.0), &VerifyConfig { tol: 1e-6, ..cfg(3, 0) });
    for (x, y) in a.checks.iter().zip(&b.checks) {
        assert_eq!(x.name, y.name);
        if x.threshold > 0.0 && x.threshold.is_finite() && !x.informational {
            assert!((y.threshold / x.threshold - 100.0).abs() < 1e-9, "{}", x.name);
        }
    }
}
