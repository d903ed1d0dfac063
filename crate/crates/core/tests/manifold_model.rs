mod common;

use common::*;
use geom_core::linalg::{index_of, orthonormal_basis, DEFAULT_DEGENERACY_TOL};
use geom_core::manifold::load_spec;
use geom_core::rng::SplitMix64;
use geom_core::{GeomError, Point, TangentVector};

fn all_specs() -> Vec<geom_core::MetricSpec> {
    let mut v: Vec<_> = presets().into_iter().map(|(s, _)| s).collect();
    v.push(skewed());
    v
}

#[test]
fn first_partials_match_central_differences() {
    for spec in all_specs() {
        let m = spec.dim();
        for p in points(&spec, 20, 3) {
            let dg = spec.metric_partials_at(&p).unwrap();
            for k in 0..m {
                let h = 1e-5;
                let mut x = p.coords().to_vec();
                x[k] += h;
                let gp = spec.metric_at(&Point::new(x.clone())).unwrap();
                x[k] -= 2.0 * h;
                let gm = spec.metric_at(&Point::new(x)).unwrap();
                for i in 0..m {
                    for j in 0..m {
                        let fd = (gp.get(i, j) - gm.get(i, j)) / (2.0 * h);
                        let ad = dg[[k, i, j]];
                        assert!((ad - fd).abs() <= 1e-6 * (1.0 + fd.abs()), "{} d{k}g{i}{j}: {ad} vs {fd}", spec.name());
                    }
                }
            }
        }
    }
}

#[test]
fn second_partials_match_differences_of_first() {
    for spec in all_specs() {
        let m = spec.dim();
        for p in points(&spec, 10, 4) {
            let ddg = spec.metric_second_partials_at(&p).unwrap();
            for l in 0..m {
                let h = 1e-5;
                let mut x = p.coords().to_vec();
                x[l] += h;
                let dp = spec.metric_partials_at(&Point::new(x.clone())).unwrap();
                x[l] -= 2.0 * h;
                let dm = spec.metric_partials_at(&Point::new(x)).unwrap();
                for k in 0..m {
                    for i in 0..m {
                        for j in 0..m {
                            let fd = (dp[[k, i, j]] - dm[[k, i, j]]) / (2.0 * h);
                            let ad = ddg[[l, k, i, j]];
                            assert!((ad - fd).abs() <= 1e-6 * (1.0 + fd.abs()), "{}: {ad} vs {fd}", spec.name());
                            assert_eq!(ddg[[l, k, i, j]], ddg[[k, l, i, j]]);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn validation_reports_the_known_index() {
    for (spec, nu) in presets() {
        let rep = spec.validate(100, 11, DEFAULT_DEGENERACY_TOL);
        assert!(rep.is_ok(), "{}: {:?}", spec.name(), rep.failures);
        assert_eq!(rep.index, Some(nu), "{}", spec.name());
    }
    for m in 1..=5 {
        for nu in 0..=m {
            assert_eq!(flat(m, nu).validate(20, 0, DEFAULT_DEGENERACY_TOL).index, Some(nu));
        }
    }
}

#[test]
fn pointwise_index_and_orthonormal_frames() {
    for (spec, nu) in presets() {
        for p in points(&spec, 50, 5) {
            let g = spec.metric_at(&p).unwrap();
            assert_eq!(index_of(&g, DEFAULT_DEGENERACY_TOL).unwrap(), nu);
            let ob = orthonormal_basis(&g, DEFAULT_DEGENERACY_TOL).unwrap();
            assert_eq!(ob.index(), nu);
            for a in 0..spec.dim() {
                for b in 0..spec.dim() {
                    let target = if a == b { ob.signs[a] } else { 0.0 };
                    assert!((g.bilinear(&ob.vector(a), &ob.vector(b)) - target).abs() <= 1e-10);
                }
            }
        }
    }
}

#[test]
fn sign_changing_metric_is_reported() {
    let spec = load_spec(
        r#"{"dim": 2, "coords": ["x", "y"], "domain": {"lower": [-1, -1], "upper": [1, 1]},
            "metric": [["x", "0"], ["0", "1"]]}"#,
    )
    .unwrap();
    let rep = spec.validate(200, 2, DEFAULT_DEGENERACY_TOL);
    assert!(!rep.is_ok());
    assert!(rep.into_result().is_err());
}

#[test]
fn asymmetric_metric_is_reported() {
    let spec = load_spec(
        r#"{"dim": 2, "coords": ["x", "y"], "metric": [["1", "x"], ["0", "1"]]}"#,
    )
    .unwrap();
    match spec.validate(20, 2, DEFAULT_DEGENERACY_TOL).into_result() {
        Err(GeomError::Symmetry { .. }) => {}
        other => panic!("expected a symmetry failure, got {other:?}"),
    }
}

#[test]
fn gradient_duality_on_presets() {
    let mut rng = SplitMix64::new(21);
    for spec in all_specs() {
        let coords: Vec<&str> = spec.coords().iter().map(String::as_str).collect();
        for p in points(&spec, 100, 6) {
            let terms: Vec<String> = coords
                .iter()
                .map(|c| format!("{:?} * sin({:?} * {c})", rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
                .collect();
            let f = spec.parse_scalar(&terms.join(" + ")).unwrap();
            let x = TangentVector::new(p.clone(), (0..spec.dim()).map(|_| rng.uniform(-1.0, 1.0)).collect::<Vec<_>>());
            let grad = spec.gradient_at(&f, &p).unwrap();
            let lhs = spec.inner_at(&grad, &x).unwrap();
            let rhs = spec.directional_derivative(&f, &x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9, "{}: {lhs} vs {rhs}", spec.name());
        }
    }
}

#[test]
fn directional_derivative_matches_difference_quotient() {
    let spec = skewed();
    let f = spec.parse_scalar("exp(u) * cos(v) + u*v^2").unwrap();
    for p in points(&spec, 20, 8) {
        let x = TangentVector::new(p.clone(), vec![0.3, -0.7]);
        let h = 1e-6;
        let shifted = |s: f64| {
            let y: Vec<f64> = p.coords().iter().zip(&x.comp).map(|(a, b)| a + s * b).collect();
            f.eval_slots_real(&spec.slot_values(&y)).unwrap()
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        let ad = spec.directional_derivative(&f, &x).unwrap();
        assert!((ad - fd).abs() <= 1e-7 * (1.0 + fd.abs()));
    }
}

#[test]
fn flat_and_sharp_fields_round_trip() {
    let mut rng = SplitMix64::new(9);
    for spec in all_specs() {
        for p in points(&spec, 30, 10) {
            let v = TangentVector::new(p.clone(), (0..spec.dim()).map(|_| rng.uniform(-2.0, 2.0)).collect::<Vec<_>>());
            let back = spec.sharp_field_at(&spec.flat_field_at(&v).unwrap()).unwrap();
            assert!(max_dev(&back.comp, &v.comp) <= 1e-10);
            assert_eq!(back.base, v.base);
        }
    }
}

#[test]
fn inner_product_of_mismatched_bases_fails() {
    let spec = sphere(1.0);
    let v = TangentVector::new(Point::new(vec![1.0, 0.0]), vec![1.0, 0.0]);
    let w = TangentVector::new(Point::new(vec![1.1, 0.0]), vec![1.0, 0.0]);
    assert_eq!(spec.inner_at(&v, &w), Err(GeomError::BasePointMismatch));
}

#[test]
fn standard_metric_inner_product() {
    let spec = flat(2, 1);
    let p = Point::new(vec![0.0, 0.0]);
    let v = TangentVector::new(p.clone(), vec![1.0, 0.0]);
    assert_eq!(spec.inner_at(&v, &v).unwrap(), -1.0);
    let w = TangentVector::new(p, vec![3.0, 2.0]);
    assert_eq!(spec.inner_at(&w, &w).unwrap(), -9.0 + 4.0);
}

#[test]
fn out_of_chart_points_fail() {
    let spec = halfplane();
    assert!(matches!(spec.metric_at(&Point::new(vec![0.0, -1.0])), Err(GeomError::OutOfChart { .. })));
    assert!(matches!(
        schwarzschild(1.0).metric_at(&Point::new(vec![0.0, 2.0, 1.0, 0.0])),
        Err(GeomError::OutOfChart { .. })
    ));
}

#[test]
fn document_round_trip_preserves_the_chart() {
    for spec in all_specs() {
        let text = serde_json::to_string(&spec.to_document()).unwrap();
        let again = load_spec(&text).unwrap();
        for p in points(&spec, 5, 12) {
            assert_eq!(again.metric_at(&p).unwrap(), spec.metric_at(&p).unwrap());
        }
    }
}
